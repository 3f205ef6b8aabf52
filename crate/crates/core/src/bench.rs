//! Batch-size-1 latency measurements for retrieval and the metrics.

use std::collections::BTreeMap;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::DescriptorSet;
use crate::manifest::RunManifest;
use crate::metrics::{self, Metric, MetricConfig};
use crate::retrieval;
use crate::timing::{mean_std, TimingStats};

/// Metrics timed by [`run_bench`]. SUE needs poses and is left out.
pub const BENCH_METRICS: [Metric; 5] = [Metric::Rs, Metric::Sd, Metric::Su, Metric::L2, Metric::Pa];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTiming {
    /// Pooled over every query of every repeat.
    pub per_query: TimingStats,
    pub repeat_means_ms: Vec<f64>,
    pub mean_of_repeats_ms: f64,
    pub std_of_repeats_ms: f64,
}

impl MetricTiming {
    fn from_repeats(repeats: &[Vec<Duration>]) -> Self {
        let pooled: Vec<Duration> = repeats.iter().flatten().copied().collect();
        let repeat_means_ms: Vec<f64> = repeats
            .iter()
            .map(|r| TimingStats::from_durations(r).map_or(f64::NAN, |s| s.mean_ms))
            .collect();
        let (mean, std) = mean_std(&repeat_means_ms);
        Self {
            per_query: TimingStats::from_durations(&pooled).expect("at least one sample"),
            repeat_means_ms,
            mean_of_repeats_ms: mean,
            std_of_repeats_ms: std,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub manifest: RunManifest,
    pub refs: usize,
    pub queries: usize,
    pub dim: usize,
    pub k: usize,
    pub repeat: usize,
    pub retrieval: MetricTiming,
    pub metrics: BTreeMap<Metric, MetricTiming>,
    /// rs, sd and su computed together, as a deployment would.
    pub rs_sd_su_combined: MetricTiming,
}

/// Times exact search and every metric in [`BENCH_METRICS`], one query at a
/// time, `repeat` times over the whole query set. Inputs are normalized first.
pub fn run_bench(
    manifest: RunManifest,
    queries: &DescriptorSet,
    refs: &DescriptorSet,
    k: usize,
    repeat: usize,
) -> Result<BenchReport> {
    if repeat == 0 {
        return Err(Error::Config("repeat must be at least 1".into()));
    }
    if queries.is_empty() {
        return Err(Error::Config("bench needs at least one query".into()));
    }
    let queries = retrieval::normalize(queries)?;
    let refs = retrieval::normalize(refs)?;

    let single: Vec<(Metric, MetricConfig)> = BENCH_METRICS
        .iter()
        .map(|&m| {
            (
                m,
                MetricConfig {
                    k,
                    ..MetricConfig::with_metrics(&[m])
                },
            )
        })
        .collect();
    let combined = MetricConfig {
        k,
        ..MetricConfig::with_metrics(&[Metric::Rs, Metric::Sd, Metric::Su])
    };

    let mut search_runs = Vec::with_capacity(repeat);
    let mut metric_runs: BTreeMap<Metric, Vec<Vec<Duration>>> = BTreeMap::new();
    let mut combined_runs = Vec::with_capacity(repeat);
    for _ in 0..repeat {
        let (results, lat) = retrieval::per_query_latency(&queries, &refs, k)?;
        search_runs.push(lat);
        for (m, cfg) in &single {
            let mut samples = Vec::with_capacity(results.len());
            for r in &results {
                samples.push(metrics::score_all_timed(r, cfg, None)?.1);
            }
            metric_runs.entry(*m).or_default().push(samples);
        }
        let mut samples = Vec::with_capacity(results.len());
        for r in &results {
            samples.push(metrics::score_all_timed(r, &combined, None)?.1);
        }
        combined_runs.push(samples);
    }

    Ok(BenchReport {
        manifest,
        refs: refs.len(),
        queries: queries.len(),
        dim: refs.dim(),
        k,
        repeat,
        retrieval: MetricTiming::from_repeats(&search_runs),
        metrics: metric_runs
            .iter()
            .map(|(m, runs)| (*m, MetricTiming::from_repeats(runs)))
            .collect(),
        rs_sd_su_combined: MetricTiming::from_repeats(&combined_runs),
    })
}
