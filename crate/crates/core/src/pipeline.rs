//! Batch glue between the stages: score a set of retrievals, evaluate a set
//! of scored records, and run a whole synthetic instance end to end.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::eval::{self, LabelingRule, MatchLabel, PrPoint};
use crate::io::report::Counts;
use crate::io::{PoseTable, RetrievalResult, ScoreMeta, ScoredResult};
use crate::metrics::{self, Metric, MetricConfig};
use crate::retrieval::{self, SearchConfig};
use crate::synth::{self, SynthConfig};

/// Scores every result with `cfg`. Every result must hold at least `cfg.k`
/// neighbors. Output order follows input order.
pub fn score_results(
    results: &[RetrievalResult],
    cfg: &MetricConfig,
    ref_poses: Option<&PoseTable>,
) -> Result<Vec<ScoredResult>> {
    cfg.validate(ref_poses)?;
    if let Some(r) = results.iter().find(|r| r.neighbors().len() < cfg.k) {
        return Err(Error::KTooLarge {
            k: cfg.k,
            available: r.neighbors().len(),
        });
    }
    let meta = ScoreMeta {
        alpha: cfg.weights.alpha(),
        k: cfg.k,
        shift: cfg.shift,
    };
    results
        .par_iter()
        .map(|r| {
            let record = metrics::score_validated(r, cfg, ref_poses)?;
            Ok(ScoredResult {
                result: r.clone(),
                record,
                meta,
            })
        })
        .collect()
}

/// AUC-PR and both curves for one metric.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricEvaluation {
    pub auc_pr: f64,
    pub system_curve: Vec<PrPoint>,
    pub predictor_curve: Vec<PrPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub meta: ScoreMeta,
    pub labels: Vec<MatchLabel>,
    pub counts: Counts,
    pub metrics: BTreeMap<Metric, MetricEvaluation>,
}

impl Evaluation {
    pub fn auc(&self, metric: Metric) -> Option<f64> {
        self.metrics.get(&metric).map(|m| m.auc_pr)
    }
}

/// Labels the rank-1 predictions and evaluates every metric present in the
/// scored records. All records must carry the same scoring parameters and the
/// same metric set, and query ids must be unique.
pub fn evaluate(
    scored: &[ScoredResult],
    query_gt: &PoseTable,
    ref_poses: &PoseTable,
    rule: &LabelingRule,
) -> Result<Evaluation> {
    let first = scored
        .first()
        .ok_or_else(|| Error::Validation("no scored records to evaluate".into()))?;
    let meta = first.meta;
    let metric_set: Vec<Metric> = first.record.values.keys().copied().collect();
    if metric_set.is_empty() {
        return Err(Error::Validation("scored records carry no metric values".into()));
    }
    let mut seen = BTreeSet::new();
    for s in scored {
        if s.meta != meta {
            return Err(Error::Validation(format!(
                "query {} was scored with different parameters than query {}",
                s.result.query_id(),
                first.result.query_id()
            )));
        }
        if !s.record.values.keys().eq(metric_set.iter()) {
            return Err(Error::Validation(format!(
                "query {} has a different metric set than query {}",
                s.result.query_id(),
                first.result.query_id()
            )));
        }
        if !seen.insert(s.result.query_id()) {
            return Err(Error::Validation(format!(
                "duplicate query id {}",
                s.result.query_id()
            )));
        }
    }

    let results: Vec<RetrievalResult> = scored.iter().map(|s| s.result.clone()).collect();
    let labels = eval::label_matches(&results, query_gt, ref_poses, rule)?;
    let correct = labels.iter().filter(|l| l.correct).count();
    let counts = Counts {
        total: labels.len(),
        correct,
        incorrect: labels.len() - correct,
    };

    let metrics = metric_set
        .par_iter()
        .map(|&m| {
            let u: Vec<f64> = scored.iter().map(|s| s.record.values[&m]).collect();
            Ok((
                m,
                MetricEvaluation {
                    auc_pr: eval::auc_pr(&labels, &u)?,
                    system_curve: eval::system_pr_curve(&labels, &u)?,
                    predictor_curve: eval::predictor_pr_curve(&labels, &u)?,
                },
            ))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .collect();

    Ok(Evaluation {
        meta,
        labels,
        counts,
        metrics,
    })
}

/// Everything produced by an in-memory synthetic run.
#[derive(Debug, Clone)]
pub struct SyntheticRun {
    pub instance: synth::SynthInstance,
    pub results: Vec<RetrievalResult>,
    pub scored: Vec<ScoredResult>,
    pub evaluation: Evaluation,
}

/// generate, retrieve with `retrieve_k` neighbors, score with `metric_cfg`,
/// evaluate with `rule`, without touching the file system.
pub fn run_synthetic(
    synth_cfg: &SynthConfig,
    retrieve_k: usize,
    metric_cfg: &MetricConfig,
    rule: &LabelingRule,
) -> Result<SyntheticRun> {
    let instance = synth::generate(synth_cfg)?;
    let results = retrieval::top_k_search(
        &instance.queries,
        &instance.refs,
        &SearchConfig {
            k: retrieve_k,
            normalize_inputs: true,
        },
    )?;
    let scored = score_results(&results, metric_cfg, Some(&instance.ref_poses))?;
    let evaluation = evaluate(&scored, &instance.query_gt, &instance.ref_poses, rule)?;
    Ok(SyntheticRun {
        instance,
        results,
        scored,
        evaluation,
    })
}
