//! Failure-prediction quality of uncertainty scores.
//!
//! Each query's rank-1 match is labeled correct or incorrect against ground
//! truth. An uncertainty score is then judged as a binary classifier whose
//! output is `-uncertainty` and whose positive class is "correct":
//!
//! * [`auc_pr`] is the average precision of that ranking (step-wise sum, no
//!   interpolation). Tied scores are ranked pessimistically: incorrect before
//!   correct, then by ascending query id.
//! * [`predictor_pr_curve`] gives one precision/recall point per distinct
//!   uncertainty value.
//! * [`system_pr_curve`] is the end-to-end view: accept every prediction with
//!   `u <= t`, reject the rest, and report the resulting precision and recall.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{Pose, PoseMode, PoseTable, RetrievalResult};
use crate::metrics::{self, Metric, MetricConfig, ScoreVector, SuWeights};

pub const DEFAULT_TAU_METERS: f64 = 25.0;
pub const DEFAULT_TAU_FRAMES: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MatchLabel {
    pub query_id: u64,
    pub correct: bool,
    /// Meters (planar) or absolute frame offset (frame).
    pub distance: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelingRule {
    pub mode: PoseMode,
    pub tau: f64,
}

impl LabelingRule {
    pub fn new(mode: PoseMode, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Config(format!("tau must be positive, got {tau}")));
        }
        Ok(Self { mode, tau })
    }

    /// 25 m for planar poses, 10 frames for frame indices.
    pub fn default_for(mode: PoseMode) -> Self {
        let tau = match mode {
            PoseMode::Planar => DEFAULT_TAU_METERS,
            PoseMode::Frame => DEFAULT_TAU_FRAMES,
        };
        Self { mode, tau }
    }
}

/// Labels every rank-1 prediction; a match within `tau` (inclusive) is correct.
pub fn label_matches(
    results: &[RetrievalResult],
    query_gt: &PoseTable,
    ref_poses: &PoseTable,
    rule: &LabelingRule,
) -> Result<Vec<MatchLabel>> {
    for table in [query_gt, ref_poses] {
        if table.mode() != rule.mode {
            return Err(Error::ModeMismatch {
                expected: rule.mode.as_str(),
                found: table.mode().as_str(),
            });
        }
    }
    results
        .iter()
        .map(|r| {
            let q = query_gt.require(r.query_id())?;
            let p = ref_poses.require(r.top().ref_id)?;
            let distance = match (q, p) {
                (Pose::Planar { x: qx, y: qy }, Pose::Planar { x, y }) => (qx - x).hypot(qy - y),
                (Pose::Frame(a), Pose::Frame(b)) => (*a as f64 - *b as f64).abs(),
                _ => unreachable!("table modes checked above"),
            };
            Ok(MatchLabel {
                query_id: r.query_id(),
                correct: distance <= rule.tau,
                distance,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
    pub accepted: usize,
    pub true_positives: usize,
}

fn check_inputs(labels: &[MatchLabel], uncertainties: &[f64]) -> Result<usize> {
    if labels.len() != uncertainties.len() {
        return Err(Error::LengthMismatch {
            labels: labels.len(),
            values: uncertainties.len(),
        });
    }
    if let Some(i) = uncertainties.iter().position(|u| !u.is_finite()) {
        return Err(Error::Data(format!(
            "non-finite uncertainty for query {}",
            labels[i].query_id
        )));
    }
    let positives = labels.iter().filter(|l| l.correct).count();
    if positives == 0 {
        return Err(Error::NoPositives);
    }
    Ok(positives)
}

/// Indices in pessimistic rank order: increasing uncertainty, incorrect
/// before correct on ties, then ascending query id.
fn pessimistic_order(labels: &[MatchLabel], uncertainties: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..labels.len()).collect();
    order.sort_by(|&a, &b| {
        uncertainties[a]
            .total_cmp(&uncertainties[b])
            .then(labels[a].correct.cmp(&labels[b].correct))
            .then(labels[a].query_id.cmp(&labels[b].query_id))
    });
    order
}

/// Average precision of the correct-vs-incorrect ranking induced by `-u`.
pub fn auc_pr(labels: &[MatchLabel], uncertainties: &[f64]) -> Result<f64> {
    let positives = check_inputs(labels, uncertainties)?;
    let mut tp = 0usize;
    let mut sum = 0.0;
    for (rank, i) in pessimistic_order(labels, uncertainties).into_iter().enumerate() {
        if labels[i].correct {
            tp += 1;
            sum += tp as f64 / (rank + 1) as f64;
        }
    }
    Ok(sum / positives as f64)
}

fn threshold_points(labels: &[MatchLabel], uncertainties: &[f64], positives: usize) -> Vec<PrPoint> {
    let order = pessimistic_order(labels, uncertainties);
    let mut points = Vec::new();
    let (mut tp, mut accepted) = (0usize, 0usize);
    for (pos, &i) in order.iter().enumerate() {
        accepted += 1;
        if labels[i].correct {
            tp += 1;
        }
        let last_of_group = order
            .get(pos + 1)
            .is_none_or(|&j| uncertainties[j] != uncertainties[i]);
        if last_of_group {
            points.push(PrPoint {
                threshold: uncertainties[i],
                precision: tp as f64 / accepted as f64,
                recall: tp as f64 / positives as f64,
                accepted,
                true_positives: tp,
            });
        }
    }
    points
}

/// One point per distinct uncertainty value, thresholds ascending.
pub fn predictor_pr_curve(labels: &[MatchLabel], uncertainties: &[f64]) -> Result<Vec<PrPoint>> {
    let positives = check_inputs(labels, uncertainties)?;
    Ok(threshold_points(labels, uncertainties, positives))
}

/// Rejection curve: a leading accept-none point (precision 1 by convention,
/// recall 0), then one point per distinct threshold in increasing-recall order.
pub fn system_pr_curve(labels: &[MatchLabel], uncertainties: &[f64]) -> Result<Vec<PrPoint>> {
    let positives = check_inputs(labels, uncertainties)?;
    let min_u = uncertainties.iter().copied().fold(f64::INFINITY, f64::min);
    let mut points = vec![PrPoint {
        threshold: min_u.next_down(),
        precision: 1.0,
        recall: 0.0,
        accepted: 0,
        true_positives: 0,
    }];
    points.extend(threshold_points(labels, uncertainties, positives));
    Ok(points)
}

/// Integrates a threshold curve with the pessimistic step rule: inside each
/// threshold group the rejected-incorrect items are taken first. Reproduces
/// [`auc_pr`] exactly for curves from [`predictor_pr_curve`] or
/// [`system_pr_curve`].
pub fn average_precision_from_curve(points: &[PrPoint]) -> Result<f64> {
    let last = points.last().ok_or(Error::NoPositives)?;
    let positives = last.true_positives;
    if positives == 0 {
        return Err(Error::NoPositives);
    }
    let (mut tp0, mut acc0) = (0usize, 0usize);
    let mut sum = 0.0;
    for p in points {
        let gained = p.true_positives - tp0;
        let misses = p.accepted - acc0 - gained;
        for j in 1..=gained {
            sum += (tp0 + j) as f64 / (acc0 + misses + j) as f64;
        }
        tp0 = p.true_positives;
        acc0 = p.accepted;
    }
    Ok(sum / positives as f64)
}

/// Interpolated precision: the best precision reachable at recall >= `recall`.
pub fn interpolated_precision(points: &[PrPoint], recall: f64) -> f64 {
    points
        .iter()
        .filter(|p| p.recall >= recall)
        .map(|p| p.precision)
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    pub param: f64,
    pub auc_pr: f64,
}

/// AUC-PR of `su` at every alpha in `alphas`.
pub fn ablate_alpha(
    labels: &[MatchLabel],
    score_vectors: &[ScoreVector],
    alphas: &[f64],
) -> Result<Vec<AblationRow>> {
    if alphas.is_empty() {
        return Err(Error::Config("alpha grid is empty".into()));
    }
    let weights = alphas
        .iter()
        .map(|&a| SuWeights::new(a))
        .collect::<Result<Vec<_>>>()?;
    if labels.len() != score_vectors.len() {
        return Err(Error::LengthMismatch {
            labels: labels.len(),
            values: score_vectors.len(),
        });
    }
    let parts = score_vectors
        .iter()
        .map(|v| Ok((metrics::rs(v)?, metrics::sd(v)?)))
        .collect::<Result<Vec<(f64, f64)>>>()?;
    weights
        .par_iter()
        .map(|w| {
            let u: Vec<f64> = parts.iter().map(|&(r, d)| metrics::combine(r, d, *w)).collect();
            Ok(AblationRow {
                param: w.alpha(),
                auc_pr: auc_pr(labels, &u)?,
            })
        })
        .collect()
}

/// AUC-PR of one metric as the number of candidates `k` varies.
pub fn ablate_k(
    labels: &[MatchLabel],
    results: &[RetrievalResult],
    ks: &[usize],
    metric: Metric,
    weights: SuWeights,
    shift: bool,
    ref_poses: Option<&PoseTable>,
) -> Result<Vec<AblationRow>> {
    if ks.is_empty() {
        return Err(Error::Config("k grid is empty".into()));
    }
    if let Some(&k) = ks.iter().find(|&&k| k < 2) {
        return Err(Error::Config(format!("k = {k} in grid; ablation needs k >= 2")));
    }
    let max_k = *ks.iter().max().unwrap();
    if let Some(r) = results.iter().find(|r| r.neighbors().len() < max_k) {
        return Err(Error::Config(format!(
            "k = {max_k} exceeds the {} neighbors stored for query {}",
            r.neighbors().len(),
            r.query_id()
        )));
    }
    if labels.len() != results.len() {
        return Err(Error::LengthMismatch {
            labels: labels.len(),
            values: results.len(),
        });
    }
    ks.par_iter()
        .map(|&k| {
            let cfg = MetricConfig {
                metrics: vec![metric],
                weights,
                k,
                shift,
            };
            cfg.validate(ref_poses)?;
            let u = results
                .iter()
                .map(|r| {
                    let rec = metrics::score_validated(r, &cfg, ref_poses)?;
                    Ok(rec.values[&metric])
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(AblationRow {
                param: k as f64,
                auc_pr: auc_pr(labels, &u)?,
            })
        })
        .collect()
}
