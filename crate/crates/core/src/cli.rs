//! The `vprunc` command line.
//!
//! Exit codes: 0 on success, 1 on invalid input or arguments (one diagnostic
//! line on stderr), 2 on I/O failure.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::bench;
use crate::error::{Error, Result};
use crate::eval::{self, LabelingRule};
use crate::io::report::{self, Conventions, Counts, MetricSummary};
use crate::io::{self, EvalReport, PoseMode, ScoreMeta};
use crate::manifest::RunManifest;
use crate::metrics::{Metric, MetricConfig, ScoreVector, SuWeights, DEFAULT_ALPHA, DEFAULT_K};
use crate::pipeline;
use crate::retrieval::{self, SearchConfig};
use crate::synth::{self, SynthConfig};
use crate::timing::mean_std;

#[derive(Debug, Parser)]
#[command(name = "vprunc", version, about = "Retrieval uncertainty toolkit for visual place recognition")]
struct Cli {
    /// Worker threads (default: all cores). Outputs never depend on it.
    #[arg(long, global = true, env = "VPRUNC_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a synthetic instance (descriptors, poses, ground truth).
    Synth(SynthArgs),
    /// Exact top-k cosine retrieval.
    Retrieve(RetrieveArgs),
    /// Compute uncertainty metrics for retrieval results.
    Score(ScoreArgs),
    /// Label predictions and compute AUC-PR and rejection curves.
    Eval(EvalArgs),
    /// Sweep alpha or k and tabulate AUC-PR.
    Ablate {
        #[command(subcommand)]
        which: AblateCommand,
    },
    /// Per-query latency of retrieval and metrics at batch size 1.
    Bench(BenchArgs),
    /// Convert whitespace-separated text descriptors to .vprd.
    Convert(ConvertArgs),
    /// Run the synthetic pipeline over several seeds and report mean and std.
    Replicate(ReplicateArgs),
}

#[derive(Debug, Args)]
struct SynthArgs {
    /// JSON generator configuration; missing fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Debug, Args)]
struct RetrieveArgs {
    #[arg(long)]
    refs: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long)]
    out: PathBuf,
    /// Trust the inputs to be unit-norm already.
    #[arg(long)]
    no_normalize: bool,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[arg(long)]
    results: PathBuf,
    /// Comma-separated subset of rs,sd,su,l2,pa,sue.
    #[arg(long, default_value = "rs,sd,su,l2,pa")]
    metrics: String,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// Planar reference poses; required for sue.
    #[arg(long)]
    ref_poses: Option<PathBuf>,
    /// Remap scores with s -> (1 + s) / 2 before the ratio metrics.
    #[arg(long)]
    shift: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct LabelArgs {
    #[arg(long)]
    query_gt: PathBuf,
    #[arg(long)]
    ref_poses: PathBuf,
    #[arg(long, default_value = "planar")]
    mode: PoseMode,
    /// Correctness radius: meters (planar, default 25) or frames (frame, default 10).
    #[arg(long)]
    tau: Option<f64>,
}

impl LabelArgs {
    fn rule(&self) -> Result<LabelingRule> {
        match self.tau {
            Some(t) => LabelingRule::new(self.mode, t),
            None => Ok(LabelingRule::default_for(self.mode)),
        }
    }
}

#[derive(Debug, Args)]
struct EvalArgs {
    #[arg(long)]
    scored: PathBuf,
    #[command(flatten)]
    label: LabelArgs,
    #[arg(long)]
    out: PathBuf,
    /// Directory for full per-metric PR curves as CSV.
    #[arg(long)]
    curves_dir: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum AblateCommand {
    /// AUC-PR of su over a grid of alpha values.
    Alpha(AblateAlphaArgs),
    /// AUC-PR of one metric over a grid of candidate counts.
    K(AblateKArgs),
}

#[derive(Debug, Args)]
struct AblateCommon {
    #[arg(long)]
    results: PathBuf,
    #[command(flatten)]
    label: LabelArgs,
    #[arg(long)]
    shift: bool,
    /// CSV output with columns param,auc_pr.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct AblateAlphaArgs {
    #[command(flatten)]
    common: AblateCommon,
    /// lo:hi:step, or a comma-separated list.
    #[arg(long, default_value = "0:1:0.05")]
    grid: String,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
}

#[derive(Debug, Args)]
struct AblateKArgs {
    #[command(flatten)]
    common: AblateCommon,
    /// lo:hi (inclusive), lo:hi:step, or a comma-separated list.
    #[arg(long, default_value = "2:20")]
    grid: String,
    #[arg(long, default_value = "sd")]
    metric: Metric,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[arg(long)]
    refs: PathBuf,
    #[arg(long)]
    queries: PathBuf,
    #[arg(long, default_value_t = 3)]
    repeat: usize,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    /// JSON output; printed to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ConvertArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// First column of every line is the id (otherwise ids are line indices).
    #[arg(long)]
    ids_first: bool,
}

#[derive(Debug, Args)]
struct ReplicateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated seeds; default: the config seed and the next two.
    #[arg(long)]
    seeds: Option<String>,
    #[arg(long, default_value = "rs,sd,su,l2,pa")]
    metrics: String,
    #[arg(long, default_value_t = DEFAULT_ALPHA)]
    alpha: f64,
    #[arg(long, default_value_t = DEFAULT_K)]
    k: usize,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    shift: bool,
    #[arg(long)]
    out: PathBuf,
}

/// Parses `args` (including the program name) and runs the subcommand.
/// Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    0
                }
                _ => {
                    let text = e.to_string();
                    let first = text.lines().find(|l| !l.trim().is_empty()).unwrap_or("invalid arguments");
                    eprintln!("vprunc: {}", first.trim_start_matches("error: "));
                    1
                }
            };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("vprunc: {}", e.to_string().replace('\n', " "));
            if e.is_io() {
                2
            } else {
                1
            }
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.threads {
        Some(0) => Err(Error::Config("--threads must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("cannot start thread pool: {e}")))?;
            pool.install(|| dispatch(cli.command))
        }
        None => dispatch(cli.command),
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Synth(a) => cmd_synth(a),
        Command::Retrieve(a) => cmd_retrieve(a),
        Command::Score(a) => cmd_score(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Ablate { which } => match which {
            AblateCommand::Alpha(a) => cmd_ablate_alpha(a),
            AblateCommand::K(a) => cmd_ablate_k(a),
        },
        Command::Bench(a) => cmd_bench(a),
        Command::Convert(a) => cmd_convert(a),
        Command::Replicate(a) => cmd_replicate(a),
    }
}

fn load_synth_config(path: Option<&Path>) -> Result<SynthConfig> {
    let Some(path) = path else {
        return Ok(SynthConfig::default());
    };
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn cmd_synth(a: SynthArgs) -> Result<()> {
    let cfg = load_synth_config(a.config.as_deref())?;
    let inst = synth::generate(&cfg)?;
    synth::write_instance(&inst, &a.out_dir)?;
    report::write_json(&cfg, a.out_dir.join(synth::CONFIG_FILE))
}

fn cmd_retrieve(a: RetrieveArgs) -> Result<()> {
    let refs = io::read_descriptors(&a.refs)?;
    let queries = io::read_descriptors(&a.queries)?;
    let results = retrieval::top_k_search(
        &queries,
        &refs,
        &SearchConfig {
            k: a.k,
            normalize_inputs: !a.no_normalize,
        },
    )?;
    io::write_results(&a.out, &results)
}

fn metric_config(metrics: &str, alpha: f64, k: usize, shift: bool) -> Result<MetricConfig> {
    Ok(MetricConfig {
        metrics: Metric::parse_list(metrics)?,
        weights: SuWeights::new(alpha)?,
        k,
        shift,
    })
}

fn cmd_score(a: ScoreArgs) -> Result<()> {
    let cfg = metric_config(&a.metrics, a.alpha, a.k, a.shift)?;
    if cfg.metrics.contains(&Metric::Sue) && a.ref_poses.is_none() {
        return Err(Error::Config("metric sue requires --ref-poses".into()));
    }
    let poses = a
        .ref_poses
        .as_ref()
        .map(|p| io::read_poses(p, PoseMode::Planar))
        .transpose()?;
    let results = io::read_results(&a.results)?;
    let scored = pipeline::score_results(&results, &cfg, poses.as_ref())?;
    io::write_scored(&a.out, &scored)
}

fn cmd_eval(a: EvalArgs) -> Result<()> {
    let rule = a.label.rule()?;
    let scored = io::read_scored(&a.scored)?;
    let query_gt = io::read_poses(&a.label.query_gt, rule.mode)?;
    let ref_poses = io::read_poses(&a.label.ref_poses, rule.mode)?;
    let ev = pipeline::evaluate(&scored, &query_gt, &ref_poses, &rule)?;

    let metric_names: Vec<&str> = ev.metrics.keys().map(|m| m.as_str()).collect();
    let manifest = RunManifest::new("eval")
        .param("mode", rule.mode)
        .param("tau", rule.tau)
        .param("alpha", ev.meta.alpha)
        .param("k", ev.meta.k)
        .param("shift", ev.meta.shift)
        .param("metrics", &metric_names)
        .input("scored", &a.scored)?
        .input("query_gt", &a.label.query_gt)?
        .input("ref_poses", &a.label.ref_poses)?;

    if let Some(dir) = &a.curves_dir {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (m, me) in &ev.metrics {
            io::write_pr_csv(&me.system_curve, dir.join(format!("system_pr_{m}.csv")))?;
            io::write_pr_csv(&me.predictor_curve, dir.join(format!("predictor_pr_{m}.csv")))?;
        }
    }

    let rep = EvalReport {
        manifest,
        labeling: rule,
        scoring: ev.meta,
        conventions: Conventions::default(),
        counts: ev.counts,
        metrics: ev
            .metrics
            .iter()
            .map(|(m, me)| {
                (
                    *m,
                    MetricSummary {
                        auc_pr: me.auc_pr,
                        pr_curve: report::sample_curve(&me.system_curve),
                    },
                )
            })
            .collect(),
        timing: None,
    };
    io::write_report_json(&rep, &a.out)?;
    for (m, me) in &ev.metrics {
        println!("{m}\tauc_pr={:.6}", me.auc_pr);
    }
    Ok(())
}

/// Parses `lo:hi:step` (inclusive, step > 0) or `a,b,c`. Grid points are
/// computed as `lo + (hi - lo) * i / n` so that decimal steps land exactly.
pub fn parse_float_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::Config(format!("invalid grid '{spec}'"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let (lo, hi, step) = match parts.as_slice() {
            [lo, hi, step] => (num(lo)?, num(hi)?, num(step)?),
            _ => return Err(bad()),
        };
        if !(lo.is_finite() && hi.is_finite() && step > 0.0 && hi >= lo) {
            return Err(bad());
        }
        let n = ((hi - lo) / step).round();
        if n > 1e6 || ((lo + n * step) - hi).abs() > 1e-9 * step.max(1.0) {
            return Err(Error::Config(format!("grid '{spec}': step does not divide the range")));
        }
        let n = n as usize;
        if n == 0 {
            return Ok(vec![lo]);
        }
        Ok((0..=n)
            .map(|i| lo + (hi - lo) * (i as f64 / n as f64))
            .collect())
    } else {
        spec.split(',').map(num).collect()
    }
}

/// Parses `lo:hi`, `lo:hi:step` (inclusive) or `a,b,c`.
pub fn parse_int_grid(spec: &str) -> Result<Vec<usize>> {
    let bad = || Error::Config(format!("invalid grid '{spec}'"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    if spec.contains(':') {
        let parts: Vec<&str> = spec.split(':').collect();
        let (lo, hi, step) = match parts.as_slice() {
            [lo, hi] => (num(lo)?, num(hi)?, 1),
            [lo, hi, step] => (num(lo)?, num(hi)?, num(step)?),
            _ => return Err(bad()),
        };
        if step == 0 || hi < lo {
            return Err(bad());
        }
        Ok((lo..=hi).step_by(step).collect())
    } else {
        spec.split(',').map(num).collect()
    }
}

struct AblationInputs {
    results: Vec<io::RetrievalResult>,
    ref_poses: io::PoseTable,
    labels: Vec<eval::MatchLabel>,
}

fn ablation_inputs(c: &AblateCommon) -> Result<AblationInputs> {
    let rule = c.label.rule()?;
    let results = io::read_results(&c.results)?;
    let query_gt = io::read_poses(&c.label.query_gt, rule.mode)?;
    let ref_poses = io::read_poses(&c.label.ref_poses, rule.mode)?;
    let labels = eval::label_matches(&results, &query_gt, &ref_poses, &rule)?;
    Ok(AblationInputs {
        results,
        ref_poses,
        labels,
    })
}

fn cmd_ablate_alpha(a: AblateAlphaArgs) -> Result<()> {
    let alphas = parse_float_grid(&a.grid)?;
    let inp = ablation_inputs(&a.common)?;
    if a.k < 2 {
        return Err(Error::Config(format!("k = {} is too small for su (need k >= 2)", a.k)));
    }
    if let Some(r) = inp.results.iter().find(|r| r.neighbors().len() < a.k) {
        return Err(Error::KTooLarge {
            k: a.k,
            available: r.neighbors().len(),
        });
    }
    let vectors: Vec<ScoreVector> = inp
        .results
        .iter()
        .map(|r| {
            let v = ScoreVector::from_result(r, a.k);
            if a.common.shift {
                v.shifted()
            } else {
                v
            }
        })
        .collect();
    let rows = eval::ablate_alpha(&inp.labels, &vectors, &alphas)?;
    io::write_ablation_csv(&rows, &a.common.out)
}

fn cmd_ablate_k(a: AblateKArgs) -> Result<()> {
    let ks = parse_int_grid(&a.grid)?;
    let inp = ablation_inputs(&a.common)?;
    let rows = eval::ablate_k(
        &inp.labels,
        &inp.results,
        &ks,
        a.metric,
        SuWeights::new(a.alpha)?,
        a.common.shift,
        Some(&inp.ref_poses),
    )?;
    io::write_ablation_csv(&rows, &a.common.out)
}

fn cmd_bench(a: BenchArgs) -> Result<()> {
    let refs = io::read_descriptors(&a.refs)?;
    let queries = io::read_descriptors(&a.queries)?;
    let manifest = RunManifest::new("bench")
        .param("k", a.k)
        .param("repeat", a.repeat)
        .param("threads", rayon::current_num_threads())
        .input("refs", &a.refs)?
        .input("queries", &a.queries)?;
    let rep = bench::run_bench(manifest, &queries, &refs, a.k, a.repeat)?;
    match &a.out {
        Some(path) => report::write_json(&rep, path),
        None => {
            let text = serde_json::to_string_pretty(&rep)
                .map_err(|e| Error::Data(format!("cannot encode bench report: {e}")))?;
            println!("{text}");
            Ok(())
        }
    }
}

fn cmd_convert(a: ConvertArgs) -> Result<()> {
    let set = io::read_descriptor_text(&a.input, a.ids_first)?;
    io::write_descriptors(&set, &a.out)
}

#[derive(Debug, Serialize)]
struct SeedRun {
    seed: u64,
    counts: Counts,
    auc_pr: BTreeMap<Metric, f64>,
}

#[derive(Debug, Serialize)]
struct MeanStd {
    mean: f64,
    std: f64,
}

#[derive(Debug, Serialize)]
struct ReplicateReport {
    manifest: RunManifest,
    synth: SynthConfig,
    labeling: LabelingRule,
    scoring: ScoreMeta,
    runs: Vec<SeedRun>,
    auc_pr: BTreeMap<Metric, MeanStd>,
}

fn cmd_replicate(a: ReplicateArgs) -> Result<()> {
    let base = load_synth_config(a.config.as_deref())?;
    let seeds: Vec<u64> = match &a.seeds {
        Some(s) => s
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<u64>()
                    .map_err(|_| Error::Config(format!("invalid seed '{x}'")))
            })
            .collect::<Result<_>>()?,
        None => (0..3).map(|i| base.seed.wrapping_add(i)).collect(),
    };
    if seeds.is_empty() {
        return Err(Error::Config("no seeds given".into()));
    }
    let cfg = metric_config(&a.metrics, a.alpha, a.k, a.shift)?;
    let rule = match a.tau {
        Some(t) => LabelingRule::new(PoseMode::Planar, t)?,
        None => LabelingRule::default_for(PoseMode::Planar),
    };
    let mut runs = Vec::with_capacity(seeds.len());
    for &seed in &seeds {
        let synth_cfg = SynthConfig { seed, ..base.clone() };
        let run = pipeline::run_synthetic(&synth_cfg, a.k, &cfg, &rule)?;
        runs.push(SeedRun {
            seed,
            counts: run.evaluation.counts,
            auc_pr: run
                .evaluation
                .metrics
                .iter()
                .map(|(m, me)| (*m, me.auc_pr))
                .collect(),
        });
    }
    let auc_pr = cfg
        .metrics
        .iter()
        .map(|m| {
            let vals: Vec<f64> = runs.iter().map(|r| r.auc_pr[m]).collect();
            let (mean, std) = mean_std(&vals);
            (*m, MeanStd { mean, std })
        })
        .collect();
    let metric_names: Vec<&str> = cfg.metrics.iter().map(|m| m.as_str()).collect();
    let mut manifest = RunManifest::new("replicate")
        .param("seeds", &seeds)
        .param("metrics", &metric_names)
        .param("alpha", a.alpha)
        .param("k", a.k)
        .param("shift", a.shift)
        .param("tau", rule.tau);
    if let Some(p) = &a.config {
        manifest = manifest.input("config", p)?;
    }
    let rep = ReplicateReport {
        manifest,
        synth: base,
        labeling: rule,
        scoring: ScoreMeta {
            alpha: a.alpha,
            k: a.k,
            shift: a.shift,
        },
        runs,
        auc_pr,
    };
    report::write_json(&rep, &a.out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_grid_lands_on_decimals() {
        let g = parse_float_grid("0:1:0.05").unwrap();
        assert_eq!(g.len(), 21);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[3], 0.15);
        assert_eq!(g[20], 1.0);
        assert_eq!(parse_float_grid("0,1").unwrap(), vec![0.0, 1.0]);
        assert!(parse_float_grid("0:1:0.3").is_err());
        assert!(parse_float_grid("1:0:0.1").is_err());
    }

    #[test]
    fn int_grid() {
        assert_eq!(parse_int_grid("2:20").unwrap().len(), 19);
        assert_eq!(parse_int_grid("2:10:4").unwrap(), vec![2, 6, 10]);
        assert_eq!(parse_int_grid("5,7").unwrap(), vec![5, 7]);
        assert!(parse_int_grid("x").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["vprunc", "retrieve", "--bogus"]), 1);
        assert_eq!(run(["vprunc", "--version"]), 0);
    }
}
