//! Every uncertainty score on a few hand-made top-k lists.
//!
//! Run with `cargo run --example metrics_walkthrough`.

use vprunc::io::{Neighbor, Pose, PoseMode, PoseTable, RetrievalResult};
use vprunc::metrics::{l2_uncertainty, pa_score, rs, sd, su, sue_score, ScoreVector, SuWeights};

fn main() -> anyhow::Result<()> {
    let cases = [
        ("clear winner", vec![0.92, 0.41, 0.38, 0.35, 0.33, 0.30, 0.29, 0.27, 0.26, 0.25]),
        ("aliased pair", vec![0.88, 0.87, 0.42, 0.40, 0.37, 0.35, 0.33, 0.31, 0.30, 0.28]),
        ("flat", vec![0.61, 0.60, 0.60, 0.59, 0.59, 0.58, 0.58, 0.57, 0.57, 0.56]),
        ("geometric", vec![1.0, 0.9, 0.81, 0.729, 0.6561]),
    ];

    println!("{:<14} {:>7} {:>7} {:>7} {:>7} {:>7}", "case", "rs", "sd", "su", "pa", "l2");
    for (name, scores) in cases {
        let s = ScoreVector::new(scores)?;
        println!(
            "{:<14} {:>7.4} {:>7.4} {:>7.4} {:>7.4} {:>7.4}",
            name,
            rs(&s)?,
            sd(&s)?,
            su(&s, SuWeights::default())?,
            pa_score(&s)?,
            l2_uncertainty(&s),
        );
    }

    // The ratio metrics only see s_i / s_1, so rescaling changes nothing.
    let s = ScoreVector::new(vec![0.8, 0.6, 0.5])?;
    let scaled = ScoreVector::new(vec![0.8 * 250.0, 0.6 * 250.0, 0.5 * 250.0])?;
    println!("\nrs(s) = {}, rs(250 s) = {}", rs(&s)?, rs(&scaled)?);

    // Negative cosines need the shift (1 + s) / 2 before taking ratios.
    let neg = ScoreVector::new(vec![-0.05, -0.2, -0.3])?;
    match rs(&neg) {
        Ok(v) => println!("rs = {v}"),
        Err(e) => println!("raw: {e}; shifted rs = {:.4}", rs(&neg.shifted())?),
    }

    // alpha sweeps from sd (0) to rs (1)
    let s = ScoreVector::new(vec![0.9, 0.85, 0.5, 0.45, 0.4])?;
    for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
        println!("alpha {alpha:.2}: su = {:.4}", su(&s, SuWeights::new(alpha)?)?);
    }

    // SUE: spread of the candidates on the map, in meters.
    let mut poses = PoseTable::new(PoseMode::Planar);
    let spots = [(0.0, 0.0), (4.0, 3.0), (-2.0, 1.0), (850.0, 10.0), (851.0, 12.0)];
    for (id, &(x, y)) in spots.iter().enumerate() {
        poses.insert(id as u64, Pose::Planar { x, y })?;
    }
    let nn = |ids: &[u64]| -> Vec<Neighbor> {
        ids.iter()
            .enumerate()
            .map(|(i, &ref_id)| Neighbor { ref_id, score: 0.9 - 0.01 * i as f64 })
            .collect()
    };
    let local = RetrievalResult::new(100, nn(&[0, 1, 2]))?;
    let split = RetrievalResult::new(101, nn(&[0, 3, 4]))?;
    println!("\nsue local = {:.1} m", sue_score(&local, &poses, 3)?);
    println!("sue split = {:.1} m", sue_score(&split, &poses, 3)?);
    Ok(())
}
