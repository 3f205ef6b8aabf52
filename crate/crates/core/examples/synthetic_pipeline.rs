//! Generate a synthetic instance, write it to disk, and run
//! retrieve -> score -> eval from the files, as the CLI does.
//!
//! `cargo run --release --example synthetic_pipeline [out_dir]`

use std::path::PathBuf;

use vprunc::io::{self, report};
use vprunc::metrics::{Metric, MetricConfig};
use vprunc::pipeline::{evaluate, score_results};
use vprunc::synth::{self, SynthConfig};
use vprunc::{top_k_search, LabelingRule, PoseMode, SearchConfig};

fn main() -> anyhow::Result<()> {
    let out = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("vprunc-synthetic"));

    let cfg = SynthConfig::alias_heavy(42);
    let inst = synth::generate(&cfg)?;
    synth::write_instance(&inst, &out)?;
    println!(
        "{} refs, {} queries, dim {} -> {}",
        inst.refs.len(),
        inst.queries.len(),
        inst.refs.dim(),
        out.display()
    );

    let refs = io::read_descriptors(out.join(synth::REFS_FILE))?;
    let queries = io::read_descriptors(out.join(synth::QUERIES_FILE))?;
    let results = top_k_search(&queries, &refs, &SearchConfig::default())?;
    io::write_results(out.join("results.jsonl"), &results)?;

    let ref_poses = io::read_poses(out.join(synth::REF_POSES_FILE), PoseMode::Planar)?;
    let query_gt = io::read_poses(out.join(synth::QUERY_GT_FILE), PoseMode::Planar)?;
    let mcfg = MetricConfig::with_metrics(&Metric::ALL);
    let scored = score_results(&results, &mcfg, Some(&ref_poses))?;
    io::write_scored(out.join("scored.jsonl"), &scored)?;

    let rule = LabelingRule::default_for(PoseMode::Planar);
    let ev = evaluate(&scored, &query_gt, &ref_poses, &rule)?;
    println!(
        "{} of {} rank-1 matches within {} m",
        ev.counts.correct, ev.counts.total, rule.tau
    );
    for (m, me) in &ev.metrics {
        println!("  {m:<4} AUC-PR {:.4}", me.auc_pr);
        report::write_pr_csv(&me.system_curve, out.join(format!("system_pr_{m}.csv")))?;
    }
    Ok(())
}
