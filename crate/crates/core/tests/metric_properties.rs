use proptest::prelude::*;

use vprunc::io::{Neighbor, Pose, PoseMode, PoseTable, RetrievalResult};
use vprunc::metrics::{self, ScoreVector, SuWeights};

fn sorted_scores() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, 2..40).prop_map(|mut v| {
        v.sort_by(|a, b| b.total_cmp(a));
        if v[0] == 0.0 {
            v[0] = 0.5;
        }
        v
    })
}

fn f32_scores() -> impl Strategy<Value = Vec<f32>> {
    prop::collection::vec(0.0f32..=1.0, 2..40).prop_map(|mut v| {
        v.sort_by(|a, b| b.total_cmp(a));
        if v[0] == 0.0 {
            v[0] = 0.5;
        }
        v
    })
}

fn sv(v: Vec<f64>) -> ScoreVector {
    ScoreVector::new(v).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn ratio_metrics_are_scale_free(s in f32_scores(), c in 1e-3f32..=1e3) {
        let base = sv(s.iter().map(|&x| x as f64).collect());
        let scaled = sv(s.iter().map(|&x| c as f64 * x as f64).collect());
        let w = SuWeights::default();
        prop_assert_eq!(metrics::rs(&base).unwrap(), metrics::rs(&scaled).unwrap());
        prop_assert_eq!(metrics::sd(&base).unwrap(), metrics::sd(&scaled).unwrap());
        prop_assert_eq!(metrics::su(&base, w).unwrap(), metrics::su(&scaled, w).unwrap());
        prop_assert_eq!(metrics::pa_score(&base).unwrap(), metrics::pa_score(&scaled).unwrap());
    }

    #[test]
    fn bounded_in_unit_interval(s in sorted_scores(), alpha in 0.0f64..=1.0) {
        let v = sv(s);
        let w = SuWeights::new(alpha).unwrap();
        for x in [
            metrics::rs(&v).unwrap(),
            metrics::sd(&v).unwrap(),
            metrics::su(&v, w).unwrap(),
            metrics::pa_score(&v).unwrap(),
        ] {
            prop_assert!((0.0..=1.0).contains(&x), "{x}");
        }
    }

    #[test]
    fn su_sits_between_its_parts(s in sorted_scores(), alpha in 0.0f64..=1.0) {
        let v = sv(s);
        let (rs, sd) = (metrics::rs(&v).unwrap(), metrics::sd(&v).unwrap());
        let su = metrics::su(&v, SuWeights::new(alpha).unwrap()).unwrap();
        prop_assert!(su >= rs.min(sd) && su <= rs.max(sd));
    }

    #[test]
    fn only_the_multiset_matters(s in sorted_scores(), seed in any::<u64>()) {
        let mut shuffled = s.clone();
        let mut x = seed | 1;
        for i in (1..shuffled.len()).rev() {
            x ^= x << 13;
            x ^= x >> 7;
            x ^= x << 17;
            shuffled.swap(i, (x % (i as u64 + 1)) as usize);
        }
        let a = sv(s);
        let b = ScoreVector::from_unsorted(shuffled).unwrap();
        prop_assert_eq!(metrics::rs(&a).unwrap(), metrics::rs(&b).unwrap());
        prop_assert_eq!(metrics::sd(&a).unwrap(), metrics::sd(&b).unwrap());
        prop_assert_eq!(metrics::pa_score(&a).unwrap(), metrics::pa_score(&b).unwrap());
    }

    #[test]
    fn raising_a_competitor_never_lowers_confidence_ratios(s in sorted_scores(), pick in any::<prop::sample::Index>(), t in 0.0f64..=1.0) {
        let i = 1 + pick.index(s.len() - 1);
        let mut raised = s.clone();
        // move s_i toward s_{i-1} without breaking the order
        raised[i] += t * (raised[i - 1] - raised[i]);
        let before = metrics::rs(&sv(s.clone())).unwrap();
        let after = metrics::rs(&sv(raised.clone())).unwrap();
        prop_assert!(after >= before);
        prop_assert!(metrics::sd(&sv(raised)).unwrap() >= metrics::sd(&sv(s)).unwrap());
    }

    #[test]
    fn alpha_endpoints(s in sorted_scores()) {
        let v = sv(s);
        let one = metrics::su(&v, SuWeights::new(1.0).unwrap()).unwrap();
        let zero = metrics::su(&v, SuWeights::new(0.0).unwrap()).unwrap();
        prop_assert_eq!(one, metrics::rs(&v).unwrap());
        prop_assert_eq!(zero, metrics::sd(&v).unwrap());
    }

    #[test]
    fn sue_ignores_translation(
        pts in prop::collection::vec((-1e4f64..1e4, -1e4f64..1e4), 2..12),
        dx in -1e5f64..1e5,
        dy in -1e5f64..1e5,
    ) {
        let n = pts.len();
        let nn: Vec<Neighbor> = (0..n)
            .map(|i| Neighbor { ref_id: i as u64, score: 0.9 - 0.05 * i as f64 })
            .collect();
        let r = RetrievalResult::new(1, nn).unwrap();
        let mut a = PoseTable::new(PoseMode::Planar);
        let mut b = PoseTable::new(PoseMode::Planar);
        for (i, &(x, y)) in pts.iter().enumerate() {
            a.insert(i as u64, Pose::Planar { x, y }).unwrap();
            b.insert(i as u64, Pose::Planar { x: x + dx, y: y + dy }).unwrap();
        }
        let ua = metrics::sue_score(&r, &a, n).unwrap();
        let ub = metrics::sue_score(&r, &b, n).unwrap();
        prop_assert!((ua - ub).abs() <= 1e-9 * ua.max(1.0), "{ua} vs {ub}");
    }
}

#[test]
fn non_positive_top_needs_shift() {
    let v = sv(vec![-0.1, -0.2, -0.5]);
    assert!(matches!(
        metrics::rs(&v),
        Err(vprunc::Error::NonPositiveTopScore { .. })
    ));
    let shifted = v.shifted();
    let rs = metrics::rs(&shifted).unwrap();
    assert!((rs - (0.4 / 0.45 + 0.25 / 0.45) / 2.0).abs() < 1e-12);
}

#[test]
fn too_few_candidates() {
    let v = sv(vec![0.9]);
    assert!(matches!(
        metrics::rs(&v),
        Err(vprunc::Error::InsufficientCandidates { got: 1 })
    ));
    assert_eq!(metrics::l2_uncertainty(&v), (2.0f64 - 1.8).sqrt());
}
