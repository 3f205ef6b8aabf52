//! Evaluation report JSON and plot-ready CSVs.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::eval::{AblationRow, LabelingRule, PrPoint};
use crate::io::ScoreMeta;
use crate::manifest::RunManifest;
use crate::metrics::Metric;
use crate::timing::TimingStats;

/// Maximum number of PR samples embedded per metric; the CSVs hold every point.
pub const MAX_CURVE_SAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub total: usize,
    pub correct: usize,
    pub incorrect: usize,
}

/// Fixed evaluation conventions, stamped into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub positive_class: String,
    pub classifier_score: String,
    pub ap_estimator: String,
    pub tie_order: String,
    pub precision_at_zero_accepted: f64,
}

impl Default for Conventions {
    fn default() -> Self {
        Self {
            positive_class: "correct".into(),
            classifier_score: "-uncertainty".into(),
            ap_estimator: "step-wise average precision".into(),
            tie_order: "incorrect before correct, then ascending query id".into(),
            precision_at_zero_accepted: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSample {
    pub threshold: f64,
    pub precision: f64,
    pub recall: f64,
}

impl From<&PrPoint> for CurveSample {
    fn from(p: &PrPoint) -> Self {
        Self {
            threshold: p.threshold,
            precision: p.precision,
            recall: p.recall,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub auc_pr: f64,
    /// Subsample of the rejection (system) PR curve.
    pub pr_curve: Vec<CurveSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub manifest: RunManifest,
    pub labeling: LabelingRule,
    pub scoring: ScoreMeta,
    pub conventions: Conventions,
    pub counts: Counts,
    pub metrics: BTreeMap<Metric, MetricSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing: Option<TimingStats>,
}

/// Evenly thins `points` to at most [`MAX_CURVE_SAMPLES`], keeping both ends.
pub fn sample_curve(points: &[PrPoint]) -> Vec<CurveSample> {
    if points.len() <= MAX_CURVE_SAMPLES {
        return points.iter().map(CurveSample::from).collect();
    }
    let last = points.len() - 1;
    let steps = MAX_CURVE_SAMPLES - 1;
    let mut out: Vec<CurveSample> = (0..=steps)
        .map(|i| CurveSample::from(&points[i * last / steps]))
        .collect();
    out.dedup();
    out
}

pub fn write_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    super::write_atomic(path.as_ref(), |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        use std::io::Write;
        w.write_all(b"\n")
    })
}

pub fn write_report_json(report: &EvalReport, path: impl AsRef<Path>) -> Result<()> {
    write_json(report, path)
}

/// `threshold,precision,recall`, one row per point.
pub fn write_pr_csv(points: &[PrPoint], path: impl AsRef<Path>) -> Result<()> {
    super::write_atomic(path.as_ref(), |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["threshold", "precision", "recall"])?;
        for p in points {
            out.write_record([
                p.threshold.to_string(),
                p.precision.to_string(),
                p.recall.to_string(),
            ])?;
        }
        out.flush()
    })
}

/// `param,auc_pr`, one row per grid point.
pub fn write_ablation_csv(rows: &[AblationRow], path: impl AsRef<Path>) -> Result<()> {
    super::write_atomic(path.as_ref(), |w| {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["param", "auc_pr"])?;
        for r in rows {
            out.write_record([r.param.to_string(), r.auc_pr.to_string()])?;
        }
        out.flush()
    })
}
