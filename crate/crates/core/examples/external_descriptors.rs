//! Bring your own descriptors: a text dump plus pose CSVs go through
//! conversion, search, scoring and evaluation, ending in a JSON report.
//!
//! `cargo run --example external_descriptors [work_dir]`
//!
//! With real data, replace the generated files with your backbone's
//! descriptor dumps (one `id v1 v2 ...` row per image) and the dataset's
//! `id,x,y` UTM poses.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vprunc::io::report::{sample_curve, Conventions, EvalReport, MetricSummary};
use vprunc::io::{self, ScoreMeta};
use vprunc::manifest::RunManifest;
use vprunc::metrics::{Metric, MetricConfig};
use vprunc::pipeline::{evaluate, score_results};
use vprunc::{top_k_search, LabelingRule, PoseMode, SearchConfig};

fn write_fake_dataset(dir: &std::path::Path) -> anyhow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (dim, n_refs) = (16, 80);
    let mut refs = String::new();
    let mut ref_csv = String::from("id,x,y\n");
    let mut anchors = Vec::new();
    for i in 0..n_refs {
        let v: Vec<f32> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (x, y) = (500_000.0 + 15.0 * i as f64, 4_200_000.0);
        writeln!(refs, "{} {}", 1000 + i, join(&v))?;
        writeln!(ref_csv, "{},{x},{y}", 1000 + i)?;
        anchors.push((v, x, y));
    }
    let mut queries = String::new();
    let mut gt_csv = String::from("id,x,y\n");
    for q in 0..40 {
        let (v, x, y) = &anchors[rng.random_range(0..n_refs)];
        let noisy: Vec<f32> = v.iter().map(|a| a + rng.random_range(-1.6..1.6)).collect();
        writeln!(queries, "{q} {}", join(&noisy))?;
        writeln!(gt_csv, "{q},{},{}", x + rng.random_range(-5.0..5.0), y)?;
    }
    std::fs::write(dir.join("refs.txt"), refs)?;
    std::fs::write(dir.join("queries.txt"), queries)?;
    std::fs::write(dir.join("refs.csv"), ref_csv)?;
    std::fs::write(dir.join("gt.csv"), gt_csv)?;
    Ok(())
}

fn join(v: &[f32]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn main() -> anyhow::Result<()> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("vprunc-external"));
    std::fs::create_dir_all(&dir)?;
    write_fake_dataset(&dir)?;

    let refs = io::read_descriptor_text(dir.join("refs.txt"), true)?;
    let queries = io::read_descriptor_text(dir.join("queries.txt"), true)?;
    io::write_descriptors(&refs, dir.join("refs.vprd"))?;
    io::write_descriptors(&queries, dir.join("queries.vprd"))?;

    let results = top_k_search(&queries, &refs, &SearchConfig::default())?;
    let ref_poses = io::read_poses(dir.join("refs.csv"), PoseMode::Planar)?;
    let query_gt = io::read_poses(dir.join("gt.csv"), PoseMode::Planar)?;

    let mut mcfg = MetricConfig::with_metrics(&Metric::ALL);
    mcfg.shift = true;
    let scored = score_results(&results, &mcfg, Some(&ref_poses))?;
    let rule = LabelingRule::new(PoseMode::Planar, 25.0)?;
    let ev = evaluate(&scored, &query_gt, &ref_poses, &rule)?;

    let manifest = RunManifest::new("eval")
        .param("mode", rule.mode.as_str())
        .param("tau", rule.tau)
        .param("alpha", mcfg.weights.alpha())
        .param("k", mcfg.k)
        .param("shift", mcfg.shift)
        .input("refs", dir.join("refs.vprd"))?
        .input("queries", dir.join("queries.vprd"))?;
    let metrics: BTreeMap<Metric, MetricSummary> = ev
        .metrics
        .iter()
        .map(|(m, me)| {
            (*m, MetricSummary { auc_pr: me.auc_pr, pr_curve: sample_curve(&me.system_curve) })
        })
        .collect();
    let report = EvalReport {
        manifest,
        labeling: rule,
        scoring: ScoreMeta { alpha: mcfg.weights.alpha(), k: mcfg.k, shift: mcfg.shift },
        conventions: Conventions::default(),
        counts: ev.counts,
        metrics,
        timing: None,
    };
    io::write_report_json(&report, dir.join("report.json"))?;

    println!("{} / {} correct", ev.counts.correct, ev.counts.total);
    for (m, s) in &report.metrics {
        println!("{m:<4} {:.4}", s.auc_pr);
    }
    println!("report: {}", dir.join("report.json").display());
    Ok(())
}
