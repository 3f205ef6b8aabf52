mod common;

use proptest::prelude::*;

use common::labels_from;
use vprunc::eval::{
    ablate_alpha, ablate_k, auc_pr, average_precision_from_curve, label_matches, predictor_pr_curve,
    system_pr_curve, LabelingRule,
};
use vprunc::metrics::{self, Metric, MetricConfig, ScoreVector, SuWeights};
use vprunc::pipeline::run_synthetic;
use vprunc::synth::oracle::oracle_ap;
use vprunc::synth::SynthConfig;
use vprunc::{Error, Neighbor, Pose, PoseMode, PoseTable, RetrievalResult};

/// Labels with at least one positive plus uncertainties drawn from `levels`
/// distinct values, so ties are frequent.
fn labeled(max_n: usize) -> impl Strategy<Value = (Vec<bool>, Vec<f64>)> {
    (1usize..max_n, 1u32..12).prop_flat_map(|(n, levels)| {
        (
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(0..levels, n),
        )
            .prop_map(move |(mut flags, lv)| {
                flags[0] = true;
                (flags, lv.into_iter().map(|l| l as f64 / levels as f64).collect())
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn auc_equals_threshold_oracle((flags, u) in labeled(300)) {
        let labels = labels_from(&flags);
        prop_assert_eq!(auc_pr(&labels, &u).unwrap(), oracle_ap(&labels, &u).unwrap());
    }

    #[test]
    fn curves_integrate_back_to_auc((flags, u) in labeled(300)) {
        let labels = labels_from(&flags);
        let ap = auc_pr(&labels, &u).unwrap();
        let pred = predictor_pr_curve(&labels, &u).unwrap();
        let sys = system_pr_curve(&labels, &u).unwrap();
        prop_assert!((average_precision_from_curve(&pred).unwrap() - ap).abs() <= 1e-12);
        prop_assert!((average_precision_from_curve(&sys).unwrap() - ap).abs() <= 1e-12);
        prop_assert!(sys.windows(2).all(|w| w[1].recall >= w[0].recall));
    }

    #[test]
    fn strictly_increasing_maps_change_nothing((flags, u) in labeled(200)) {
        let labels = labels_from(&flags);
        let v: Vec<f64> = u.iter().map(|x| 3.0 * x.exp() - 7.0).collect();
        prop_assert_eq!(auc_pr(&labels, &u).unwrap(), auc_pr(&labels, &v).unwrap());
        let strip = |c: Vec<vprunc::PrPoint>| -> Vec<(f64, f64, usize)> {
            c.into_iter().map(|p| (p.precision, p.recall, p.accepted)).collect()
        };
        prop_assert_eq!(
            strip(system_pr_curve(&labels, &u).unwrap()),
            strip(system_pr_curve(&labels, &v).unwrap())
        );
        prop_assert_eq!(
            strip(predictor_pr_curve(&labels, &u).unwrap()),
            strip(predictor_pr_curve(&labels, &v).unwrap())
        );
    }

    #[test]
    fn breaking_ties_never_lowers_ap(
        (flags, u) in labeled(200),
        jitter in prop::collection::vec(-1.0f64..1.0, 200),
    ) {
        let labels = labels_from(&flags);
        // levels are at least 1/11 apart, so this keeps the coarse order
        let perturbed: Vec<f64> = u.iter().zip(&jitter).map(|(x, j)| x + 0.01 * j).collect();
        prop_assert!(auc_pr(&labels, &perturbed).unwrap() >= auc_pr(&labels, &u).unwrap());
    }

    #[test]
    fn accept_all_endpoint_is_base_accuracy((flags, u) in labeled(200)) {
        let labels = labels_from(&flags);
        let sys = system_pr_curve(&labels, &u).unwrap();
        let first = sys.first().unwrap();
        prop_assert_eq!((first.precision, first.recall, first.accepted), (1.0, 0.0, 0));
        let last = sys.last().unwrap();
        let correct = flags.iter().filter(|&&c| c).count();
        prop_assert_eq!(last.recall, 1.0);
        prop_assert_eq!(last.precision, correct as f64 / flags.len() as f64);
        prop_assert_eq!(last.accepted, flags.len());
    }
}

#[test]
fn two_query_examples() {
    let labels = labels_from(&[true, false]);
    assert_eq!(auc_pr(&labels, &[0.1, 0.9]).unwrap(), 1.0);
    assert_eq!(auc_pr(&labels, &[0.9, 0.1]).unwrap(), 0.5);
    // a tie ranks the incorrect query first
    assert_eq!(auc_pr(&labels, &[0.4, 0.4]).unwrap(), 0.5);
}

#[test]
fn undefined_and_mismatched_inputs() {
    let labels = labels_from(&[false, false]);
    assert!(matches!(auc_pr(&labels, &[0.1, 0.2]), Err(Error::NoPositives)));
    let labels = labels_from(&[true]);
    assert!(matches!(
        auc_pr(&labels, &[0.1, 0.2]),
        Err(Error::LengthMismatch { labels: 1, values: 2 })
    ));
    assert!(auc_pr(&labels, &[f64::NAN]).is_err());
}

#[test]
fn all_correct_gives_a_flat_curve() {
    let labels = labels_from(&[true; 5]);
    let curve = predictor_pr_curve(&labels, &[0.3, 0.1, 0.2, 0.2, 0.9]).unwrap();
    assert!(curve.iter().all(|p| p.precision == 1.0));
    assert_eq!(curve.len(), 4);
}

fn one_neighbor(q: u64, r: u64) -> RetrievalResult {
    RetrievalResult::new(q, vec![Neighbor { ref_id: r, score: 0.9 }]).unwrap()
}

#[test]
fn labeling_thresholds() {
    let mut refs = PoseTable::new(PoseMode::Planar);
    refs.insert(10, Pose::Planar { x: 30.0, y: 0.0 }).unwrap();
    refs.insert(11, Pose::Planar { x: 3.0, y: 4.0 }).unwrap();
    let mut gt = PoseTable::new(PoseMode::Planar);
    gt.insert(0, Pose::Planar { x: 0.0, y: 0.0 }).unwrap();
    gt.insert(1, Pose::Planar { x: 3.0, y: 4.0 }).unwrap();
    let rule = LabelingRule::default_for(PoseMode::Planar);
    let labels = label_matches(&[one_neighbor(0, 10), one_neighbor(1, 11)], &gt, &refs, &rule).unwrap();
    assert!(!labels[0].correct);
    assert_eq!(labels[0].distance, 30.0);
    assert!(labels[1].correct);
    assert_eq!(labels[1].distance, 0.0);

    let mut frames_ref = PoseTable::new(PoseMode::Frame);
    frames_ref.insert(10, Pose::Frame(110)).unwrap();
    frames_ref.insert(11, Pose::Frame(89)).unwrap();
    let mut frames_q = PoseTable::new(PoseMode::Frame);
    frames_q.insert(0, Pose::Frame(100)).unwrap();
    frames_q.insert(1, Pose::Frame(100)).unwrap();
    let rule = LabelingRule::new(PoseMode::Frame, 10.0).unwrap();
    let labels = label_matches(&[one_neighbor(0, 10), one_neighbor(1, 11)], &frames_q, &frames_ref, &rule).unwrap();
    assert!(labels[0].correct, "offset equal to tau is inside");
    assert!(!labels[1].correct);

    assert!(matches!(
        label_matches(&[one_neighbor(0, 10)], &gt, &frames_ref, &rule),
        Err(Error::ModeMismatch { .. })
    ));
    assert!(matches!(
        label_matches(&[one_neighbor(5, 10)], &frames_q, &frames_ref, &rule),
        Err(Error::MissingPose { id: 5 })
    ));
    assert!(LabelingRule::new(PoseMode::Planar, 0.0).is_err());
}

fn small_run() -> vprunc::pipeline::SyntheticRun {
    let cfg = SynthConfig {
        n_places: 60,
        n_queries: 150,
        ..SynthConfig::alias_heavy(5)
    };
    let mcfg = MetricConfig::with_metrics(&[Metric::Rs, Metric::Sd, Metric::Su]);
    run_synthetic(&cfg, 20, &mcfg, &LabelingRule::default_for(PoseMode::Planar)).unwrap()
}

#[test]
fn alpha_grid_cardinality_and_endpoints() {
    let run = small_run();
    let vectors: Vec<ScoreVector> = run.results.iter().map(|r| ScoreVector::from_result(r, 10)).collect();
    let grid: Vec<f64> = (0..=20).map(|i| i as f64 / 20.0).collect();
    let rows = ablate_alpha(&run.evaluation.labels, &vectors, &grid).unwrap();
    assert_eq!(rows.len(), 21);
    assert!(rows.iter().zip(&grid).all(|(r, &a)| r.param == a));
    assert!((rows[0].auc_pr - run.evaluation.auc(Metric::Sd).unwrap()).abs() <= 1e-12);
    assert!((rows[20].auc_pr - run.evaluation.auc(Metric::Rs).unwrap()).abs() <= 1e-12);
    assert!(ablate_alpha(&run.evaluation.labels, &vectors, &[1.5]).is_err());
    assert!(ablate_alpha(&run.evaluation.labels, &vectors, &[]).is_err());
}

#[test]
fn k_grid_cardinality_and_default_consistency() {
    let run = small_run();
    let labels = &run.evaluation.labels;
    let ks: Vec<usize> = (2..=20).collect();
    let w = SuWeights::default();
    let rows = ablate_k(labels, &run.results, &ks, Metric::Sd, w, false, None).unwrap();
    assert_eq!(rows.len(), 19);
    let at_ten = ablate_k(labels, &run.results, &[10], Metric::Su, w, false, None).unwrap();
    assert_eq!(at_ten[0].auc_pr, run.evaluation.auc(Metric::Su).unwrap());
    assert!(ablate_k(labels, &run.results, &[21], Metric::Sd, w, false, None).is_err());
    assert!(ablate_k(labels, &run.results, &[1, 5], Metric::Sd, w, false, None).is_err());
}

#[test]
fn su_matches_rs_sd_mixture_on_real_retrievals() {
    let run = small_run();
    for s in &run.scored {
        let v = ScoreVector::from_result(&s.result, 10);
        let expect = 0.5 * metrics::rs(&v).unwrap() + 0.5 * metrics::sd(&v).unwrap();
        assert!((s.record.get(Metric::Su).unwrap() - expect).abs() <= 1e-15);
    }
}
