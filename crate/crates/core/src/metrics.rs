//! Training-free uncertainty scores computed from the top-k similarity
//! distribution of a single retrieval.
//!
//! Every score follows the same polarity: lower means more confident.
//!
//! | name | value |
//! |------|-------|
//! | `rs`  | mean of `s_i / s_1` over ranks `2..=k` |
//! | `sd`  | `median(s_1..=s_k) / s_1` |
//! | `su`  | `alpha * rs + (1 - alpha) * sd` |
//! | `l2`  | `sqrt(2 - 2 s_1)`, the Euclidean distance to the rank-1 reference |
//! | `pa`  | `s_2 / s_1` |
//! | `sue` | similarity-weighted spatial spread of the top-k reference poses (meters) |
//!
//! The ratio scores (`rs`, `sd`, `su`, `pa`) are computed from the ratios
//! `s_i / s_1` first, so scaling every input score by the same factor leaves
//! them bit-identical whenever the scaled inputs are exact.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{Neighbor, PoseTable, RetrievalResult, UncertaintyRecord};

pub const DEFAULT_K: usize = 10;
pub const DEFAULT_ALPHA: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Rs,
    Sd,
    Su,
    L2,
    Pa,
    Sue,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Rs,
        Metric::Sd,
        Metric::Su,
        Metric::L2,
        Metric::Pa,
        Metric::Sue,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Rs => "rs",
            Metric::Sd => "sd",
            Metric::Su => "su",
            Metric::L2 => "l2",
            Metric::Pa => "pa",
            Metric::Sue => "sue",
        }
    }

    /// Parses a comma-separated list such as `rs,sd,su`; duplicates collapse.
    pub fn parse_list(list: &str) -> Result<Vec<Metric>> {
        let mut out: Vec<Metric> = list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::parse)
            .collect::<Result<_>>()?;
        if out.is_empty() {
            return Err(Error::Config("metric list is empty".into()));
        }
        out.sort();
        out.dedup();
        Ok(out)
    }

    /// True for the scores defined as ratios against `s_1`.
    pub fn is_ratio(self) -> bool {
        matches!(self, Metric::Rs | Metric::Sd | Metric::Su | Metric::Pa)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown metric {s:?} (expected one of rs, sd, su, l2, pa, sue)"
                ))
            })
    }
}

/// Mixing weight between `rs` (alpha) and `sd` (1 - alpha).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuWeights {
    alpha: f64,
}

impl SuWeights {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::Config(format!("alpha {alpha} is outside [0, 1]")));
        }
        Ok(Self { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl Default for SuWeights {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
        }
    }
}

/// Top-k similarity scores, sorted non-increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreVector {
    scores: Vec<f64>,
}

impl ScoreVector {
    /// Accepts already sorted, finite scores.
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.is_empty() {
            return Err(Error::InsufficientCandidates { got: 0 });
        }
        if scores.iter().any(|s| !s.is_finite()) {
            return Err(Error::Validation("score vector contains a non-finite value".into()));
        }
        if scores.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::Validation("score vector is not sorted non-increasing".into()));
        }
        Ok(Self { scores })
    }

    /// Sorts descending before validating, so any permutation of the same
    /// multiset yields the same vector.
    pub fn from_unsorted(mut scores: Vec<f64>) -> Result<Self> {
        scores.sort_by(|a, b| b.total_cmp(a));
        Self::new(scores)
    }

    /// Keeps the first `min(k, len)` scores.
    pub fn top_k(scores: Vec<f64>, k: usize) -> Result<Self> {
        let mut v = Self::new(scores)?;
        v.scores.truncate(k.max(1));
        Ok(v)
    }

    pub fn from_result(result: &RetrievalResult, k: usize) -> Self {
        let scores = result.scores().take(k.max(1)).collect();
        // RetrievalResult already guarantees sorted finite scores.
        Self { scores }
    }

    /// Order-preserving affine map `s -> (1 + s) / 2` of cosine scores onto `[0, 1]`.
    pub fn shifted(&self) -> Self {
        Self {
            scores: self.scores.iter().map(|s| (1.0 + s) / 2.0).collect(),
        }
    }

    pub fn effective_k(&self) -> usize {
        self.scores.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.scores
    }

    pub fn top(&self) -> f64 {
        self.scores[0]
    }

    /// `s_i / s_1` for every rank, after checking the ratio preconditions.
    fn ratios(&self) -> Result<Vec<f64>> {
        if self.scores.len() < 2 {
            return Err(Error::InsufficientCandidates {
                got: self.scores.len(),
            });
        }
        let top = self.scores[0];
        if top <= 0.0 {
            return Err(Error::NonPositiveTopScore { score: top });
        }
        Ok(self.scores.iter().map(|s| s / top).collect())
    }
}

/// Ratio Spread: mean of `s_i / s_1` over ranks 2..=k.
pub fn rs(scores: &ScoreVector) -> Result<f64> {
    let r = scores.ratios()?;
    Ok(rs_from_ratios(&r))
}

fn rs_from_ratios(r: &[f64]) -> f64 {
    let sum: f64 = r[1..].iter().sum();
    sum / (r.len() - 1) as f64
}

/// Similarity Distribution: median of the top-k scores (s_1 included) over `s_1`.
/// An even count takes the mean of the two middle values.
pub fn sd(scores: &ScoreVector) -> Result<f64> {
    let r = scores.ratios()?;
    Ok(sd_from_ratios(&r))
}

fn sd_from_ratios(r: &[f64]) -> f64 {
    let n = r.len();
    if n % 2 == 1 {
        r[n / 2]
    } else {
        (r[n / 2 - 1] + r[n / 2]) / 2.0
    }
}

/// Statistical Uncertainty: `alpha * rs + (1 - alpha) * sd`.
pub fn su(scores: &ScoreVector, w: SuWeights) -> Result<f64> {
    let r = scores.ratios()?;
    Ok(combine(rs_from_ratios(&r), sd_from_ratios(&r), w))
}

/// Convex combination, clamped to `[min, max]` of its inputs so floating
/// rounding never pushes it outside the pair.
pub(crate) fn combine(rs: f64, sd: f64, w: SuWeights) -> f64 {
    let v = w.alpha * rs + (1.0 - w.alpha) * sd;
    v.clamp(rs.min(sd), rs.max(sd))
}

/// Euclidean distance between unit query and rank-1 reference, from their cosine.
pub fn l2_uncertainty(scores: &ScoreVector) -> f64 {
    (2.0 - 2.0 * scores.top()).max(0.0).sqrt()
}

/// Perceptual-aliasing ratio in the similarity domain: `s_2 / s_1`.
pub fn pa_score(scores: &ScoreVector) -> Result<f64> {
    let r = scores.ratios()?;
    Ok(r[1])
}

/// Weighted standard deviation (meters) of the top-k reference positions,
/// with weights proportional to the raw similarity scores.
pub fn sue_score(result: &RetrievalResult, poses: &PoseTable, k: usize) -> Result<f64> {
    let top = &result.neighbors()[..k.max(1).min(result.neighbors().len())];
    let scores: Vec<f64> = top.iter().map(|n| n.score).collect();
    sue_weighted(top, &scores, poses)
}

fn sue_weighted(neighbors: &[Neighbor], weights: &[f64], poses: &PoseTable) -> Result<f64> {
    if let Some(w) = weights.iter().find(|w| **w < 0.0) {
        return Err(Error::Validation(format!(
            "negative similarity {w} cannot weight poses (enable shift mode)"
        )));
    }
    let total: f64 = weights.iter().sum();
    if total <= 0.0 {
        return Err(Error::DegenerateWeights);
    }
    let points = neighbors
        .iter()
        .map(|n| poses.planar(n.ref_id))
        .collect::<Result<Vec<_>>>()?;
    // Work relative to the first pose to keep large map coordinates precise.
    let (ox, oy) = points[0];
    let rel: Vec<(f64, f64)> = points.iter().map(|(x, y)| (x - ox, y - oy)).collect();
    let (mut mx, mut my) = (0.0, 0.0);
    for ((x, y), w) in rel.iter().zip(weights) {
        mx += w / total * x;
        my += w / total * y;
    }
    let var: f64 = rel
        .iter()
        .zip(weights)
        .map(|((x, y), w)| w / total * ((x - mx).powi(2) + (y - my).powi(2)))
        .sum();
    Ok(var.max(0.0).sqrt())
}

/// Which scores to compute and with which parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricConfig {
    pub metrics: Vec<Metric>,
    pub weights: SuWeights,
    pub k: usize,
    /// Remap scores with `s -> (1 + s) / 2` before the ratio metrics and SUE weights.
    pub shift: bool,
}

impl Default for MetricConfig {
    fn default() -> Self {
        Self {
            metrics: vec![Metric::Rs, Metric::Sd, Metric::Su],
            weights: SuWeights::default(),
            k: DEFAULT_K,
            shift: false,
        }
    }
}

impl MetricConfig {
    pub fn with_metrics(metrics: &[Metric]) -> Self {
        let mut m = metrics.to_vec();
        m.sort();
        m.dedup();
        Self {
            metrics: m,
            ..Self::default()
        }
    }

    pub fn validate(&self, poses: Option<&PoseTable>) -> Result<()> {
        if self.metrics.is_empty() {
            return Err(Error::Config("no metrics enabled".into()));
        }
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.k < 2 && self.metrics.iter().any(|m| m.is_ratio()) {
            return Err(Error::Config(format!(
                "k = {} is too small for ratio metrics (need k >= 2)",
                self.k
            )));
        }
        if self.metrics.contains(&Metric::Sue) {
            match poses {
                None => {
                    return Err(Error::Config(
                        "metric sue requires a reference pose table".into(),
                    ))
                }
                Some(p) if p.mode() != crate::io::PoseMode::Planar => {
                    return Err(Error::Config("metric sue requires planar reference poses".into()))
                }
                _ => {}
            }
        }
        Ok(())
    }
}

/// Computes every enabled metric for one retrieval. Any metric failure fails
/// the whole record.
pub fn score_all(
    result: &RetrievalResult,
    cfg: &MetricConfig,
    poses: Option<&PoseTable>,
) -> Result<UncertaintyRecord> {
    cfg.validate(poses)?;
    score_validated(result, cfg, poses)
}

/// [`score_all`] plus the wall-clock time spent computing the metrics.
pub fn score_all_timed(
    result: &RetrievalResult,
    cfg: &MetricConfig,
    poses: Option<&PoseTable>,
) -> Result<(UncertaintyRecord, Duration)> {
    cfg.validate(poses)?;
    let start = Instant::now();
    let record = score_validated(result, cfg, poses)?;
    Ok((record, start.elapsed()))
}

pub(crate) fn score_validated(
    result: &RetrievalResult,
    cfg: &MetricConfig,
    poses: Option<&PoseTable>,
) -> Result<UncertaintyRecord> {
    let raw = ScoreVector::from_result(result, cfg.k);
    let adjusted = if cfg.shift { raw.shifted() } else { raw.clone() };
    let needs_ratios = cfg.metrics.iter().any(|m| m.is_ratio());
    let ratios = if needs_ratios {
        Some(adjusted.ratios()?)
    } else {
        None
    };
    let mut values = BTreeMap::new();
    for &metric in &cfg.metrics {
        let v = match metric {
            Metric::Rs => rs_from_ratios(ratios.as_deref().unwrap()),
            Metric::Sd => sd_from_ratios(ratios.as_deref().unwrap()),
            Metric::Su => {
                let r = ratios.as_deref().unwrap();
                combine(rs_from_ratios(r), sd_from_ratios(r), cfg.weights)
            }
            Metric::Pa => ratios.as_deref().unwrap()[1],
            Metric::L2 => l2_uncertainty(&raw),
            Metric::Sue => {
                let poses = poses.expect("validated");
                let top = &result.neighbors()[..raw.effective_k()];
                sue_weighted(top, adjusted.as_slice(), poses)?
            }
        };
        values.insert(metric, v);
    }
    Ok(UncertaintyRecord {
        query_id: result.query_id(),
        predicted_ref: result.top().ref_id,
        values,
    })
}
