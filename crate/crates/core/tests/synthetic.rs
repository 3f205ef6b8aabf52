mod common;

use vprunc::eval::interpolated_precision;
use vprunc::metrics::{Metric, MetricConfig};
use vprunc::pipeline::run_synthetic;
use vprunc::retrieval::{top_k_search, SearchConfig};
use vprunc::synth::{self, generate, write_instance, SynthConfig};
use vprunc::{LabelingRule, PoseMode};

const GOLDEN_ERRORS: usize = 82;

fn rule() -> LabelingRule {
    LabelingRule::default_for(PoseMode::Planar)
}

fn all_but_sue() -> MetricConfig {
    MetricConfig::with_metrics(&[Metric::Rs, Metric::Sd, Metric::Su, Metric::L2, Metric::Pa])
}

#[test]
fn same_config_same_bytes() {
    let cfg = SynthConfig {
        n_places: 40,
        n_queries: 50,
        dim: 24,
        ..SynthConfig::alias_heavy(9)
    };
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    write_instance(&generate(&cfg).unwrap(), a.path()).unwrap();
    write_instance(&generate(&cfg).unwrap(), b.path()).unwrap();
    for name in [
        synth::REFS_FILE,
        synth::QUERIES_FILE,
        synth::REF_POSES_FILE,
        synth::QUERY_GT_FILE,
        synth::TRUTH_FILE,
    ] {
        let x = std::fs::read(a.path().join(name)).unwrap();
        let y = std::fs::read(b.path().join(name)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{name} differs");
    }
}

fn noiseless(dim: usize) -> SynthConfig {
    SynthConfig {
        n_places: 50,
        refs_per_place: 1,
        n_queries: 100,
        dim,
        noise_sigma: 0.0,
        alias_rate: 0.0,
        ..SynthConfig::default()
    }
}

fn mean_su(cfg: &SynthConfig) -> f64 {
    let run = run_synthetic(cfg, 10, &MetricConfig::default(), &rule()).unwrap();
    assert_eq!(run.evaluation.counts.incorrect, 0);
    let su: Vec<f64> = run.scored.iter().map(|s| s.record.get(Metric::Su).unwrap()).collect();
    su.iter().sum::<f64>() / su.len() as f64
}

#[test]
fn noiseless_queries_hit_their_own_place() {
    let cfg = noiseless(64);
    let inst = generate(&cfg).unwrap();
    let results = top_k_search(&inst.queries, &inst.refs, &SearchConfig::default()).unwrap();
    for (r, &place) in results.iter().zip(&inst.truth) {
        assert_eq!(inst.place_of_ref(r.top().ref_id, cfg.refs_per_place), place);
        assert!((r.top().score - 1.0).abs() <= 1e-6, "{}", r.top().score);
    }
}

#[test]
fn noiseless_uncertainty_vanishes_with_spread_prototypes() {
    let coarse = mean_su(&noiseless(64));
    let fine = mean_su(&noiseless(4096));
    assert!(fine < coarse);
    assert!(fine < 0.05, "mean su {fine}");
}

#[test]
fn alias_heavy_instance() {
    let run = run_synthetic(&SynthConfig::alias_heavy(42), 10, &all_but_sue(), &rule()).unwrap();
    assert_eq!(run.evaluation.counts.total, 400);
    assert_eq!(run.evaluation.counts.incorrect, GOLDEN_ERRORS);

    let (mut aliased, mut clean) = (Vec::new(), Vec::new());
    for (s, &al) in run.scored.iter().zip(&run.instance.aliased) {
        let su = s.record.get(Metric::Su).unwrap();
        if al { aliased.push(su) } else { clean.push(su) }
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    assert!(!aliased.is_empty() && !clean.is_empty());
    assert!(mean(&aliased) > mean(&clean), "{} vs {}", mean(&aliased), mean(&clean));

    // decoy hits dominate the errors
    let wrong_on_aliased = run
        .evaluation
        .labels
        .iter()
        .zip(&run.instance.aliased)
        .filter(|(l, &al)| !l.correct && al)
        .count();
    assert!(wrong_on_aliased * 2 > GOLDEN_ERRORS);
}

#[test]
fn su_rejection_curve_dominates_l2() {
    let run = run_synthetic(&SynthConfig::alias_heavy(42), 10, &all_but_sue(), &rule()).unwrap();
    let su = &run.evaluation.metrics[&Metric::Su].system_curve;
    let l2 = &run.evaluation.metrics[&Metric::L2].system_curve;
    for i in 0..=100 {
        let r = i as f64 / 100.0;
        let (a, b) = (interpolated_precision(su, r), interpolated_precision(l2, r));
        assert!(a >= b, "recall {r}: su {a} < l2 {b}");
    }
}

#[test]
fn invalid_configs_are_rejected() {
    for cfg in [
        SynthConfig { dim: 1, ..SynthConfig::default() },
        SynthConfig { n_queries: 0, ..SynthConfig::default() },
        SynthConfig { alias_rate: 1.5, ..SynthConfig::default() },
        SynthConfig { noise_sigma: -0.1, ..SynthConfig::default() },
        SynthConfig { n_places: 1, alias_rate: 0.5, ..SynthConfig::default() },
    ] {
        assert!(generate(&cfg).is_err(), "{cfg:?}");
    }
}
