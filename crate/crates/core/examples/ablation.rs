//! Sweep the rs/sd weight alpha and the candidate count k.
//!
//! `cargo run --release --example ablation`

use vprunc::eval::{ablate_alpha, ablate_k};
use vprunc::metrics::{Metric, MetricConfig, ScoreVector, SuWeights};
use vprunc::pipeline::run_synthetic;
use vprunc::synth::SynthConfig;
use vprunc::{LabelingRule, PoseMode};

fn main() -> anyhow::Result<()> {
    // retrieve 20 so k can go up to 20 by truncation
    let run = run_synthetic(
        &SynthConfig::alias_heavy(42),
        20,
        &MetricConfig::default(),
        &LabelingRule::default_for(PoseMode::Planar),
    )?;
    let labels = &run.evaluation.labels;

    let vectors: Vec<ScoreVector> = run.results.iter().map(|r| ScoreVector::from_result(r, 10)).collect();
    let alphas: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    println!("alpha  AUC-PR(su)");
    for row in ablate_alpha(labels, &vectors, &alphas)? {
        println!("{:5.2}  {:.4}", row.param, row.auc_pr);
    }

    let ks: Vec<usize> = (2..=20).collect();
    let w = SuWeights::default();
    let sd = ablate_k(labels, &run.results, &ks, Metric::Sd, w, false, None)?;
    let su = ablate_k(labels, &run.results, &ks, Metric::Su, w, false, None)?;
    println!("\n k  AUC-PR(sd)  AUC-PR(su)");
    for (a, b) in sd.iter().zip(&su) {
        println!("{:2}  {:.4}      {:.4}", a.param, a.auc_pr, b.auc_pr);
    }
    let tail: Vec<f64> = sd.iter().filter(|r| r.param >= 5.0).map(|r| r.auc_pr).collect();
    let (lo, hi) = tail.iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
    println!("sd band for k >= 5: {:.4}", hi - lo);
    Ok(())
}
