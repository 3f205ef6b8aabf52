//! Pick an uncertainty threshold that reaches a target precision, and see
//! how much recall each metric keeps at that precision.
//!
//! `cargo run --release --example rejection_curve [target_precision]`

use vprunc::eval::interpolated_precision;
use vprunc::metrics::{Metric, MetricConfig};
use vprunc::pipeline::run_synthetic;
use vprunc::synth::SynthConfig;
use vprunc::{LabelingRule, PoseMode, PrPoint};

/// Largest-recall point whose precision is at least `target`.
fn operating_point(curve: &[PrPoint], target: f64) -> Option<&PrPoint> {
    curve
        .iter()
        .filter(|p| p.accepted > 0 && p.precision >= target)
        .max_by(|a, b| a.recall.total_cmp(&b.recall))
}

fn main() -> anyhow::Result<()> {
    let target: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0.95);
    let run = run_synthetic(
        &SynthConfig::alias_heavy(42),
        10,
        &MetricConfig::with_metrics(&[Metric::Su, Metric::Pa, Metric::L2, Metric::Sue]),
        &LabelingRule::default_for(PoseMode::Planar),
    )?;
    let c = run.evaluation.counts;
    println!(
        "accept-all precision {:.3} ({} / {})",
        c.correct as f64 / c.total as f64,
        c.correct,
        c.total
    );
    println!("target precision {target}");

    for (m, me) in &run.evaluation.metrics {
        match operating_point(&me.system_curve, target) {
            Some(p) => println!(
                "  {m:<4} u <= {:.5}: keep {:>3} queries, precision {:.3}, recall {:.3}",
                p.threshold, p.accepted, p.precision, p.recall
            ),
            None => println!("  {m:<4} never reaches the target"),
        }
    }

    println!("\ninterpolated precision at fixed recall");
    print!("{:>8}", "recall");
    for m in run.evaluation.metrics.keys() {
        print!("{:>8}", m.as_str());
    }
    println!();
    for r in [0.25, 0.5, 0.75, 0.9, 1.0] {
        print!("{r:>8.2}");
        for me in run.evaluation.metrics.values() {
            print!("{:>8.3}", interpolated_precision(&me.system_curve, r));
        }
        println!();
    }
    Ok(())
}
