//! Use SU as a gate in front of a loop-closure back end: a candidate closure
//! is only passed on when the retrieval looks unambiguous.
//!
//! `cargo run --release --example loop_closure_gate`

use vprunc::metrics::{su, ScoreVector, SuWeights};
use vprunc::retrieval::{normalize, top_k_search, SearchConfig};
use vprunc::synth::{generate, SynthConfig};

const GATE: f64 = 0.8;

fn main() -> anyhow::Result<()> {
    let cfg = SynthConfig { n_queries: 300, ..SynthConfig::alias_heavy(7) };
    let inst = generate(&cfg)?;
    let refs = normalize(&inst.refs)?;
    let queries = normalize(&inst.queries)?;
    let results = top_k_search(&queries, &refs, &SearchConfig { k: 10, normalize_inputs: false })?;

    let (mut passed, mut passed_wrong, mut blocked, mut blocked_wrong) = (0, 0, 0, 0);
    for (r, &place) in results.iter().zip(&inst.truth) {
        let u = su(&ScoreVector::from_result(r, 10), SuWeights::default())?;
        let wrong = inst.place_of_ref(r.top().ref_id, cfg.refs_per_place) != place;
        if u <= GATE {
            passed += 1;
            passed_wrong += usize::from(wrong);
        } else {
            blocked += 1;
            blocked_wrong += usize::from(wrong);
        }
    }
    let total_wrong = passed_wrong + blocked_wrong;
    println!("gate su <= {GATE}");
    println!("  passed  {passed:>4} closures, {passed_wrong} false");
    println!("  blocked {blocked:>4} closures, {blocked_wrong} false");
    println!(
        "false closures without the gate: {total_wrong} / {}, with it: {passed_wrong} / {passed}",
        results.len()
    );
    Ok(())
}
