//! Exact top-k cosine search by brute force.
//!
//! Each query is scored against every reference row and the best `k` are
//! kept in a bounded heap. Queries are processed in parallel on the current
//! rayon pool; each query's work is sequential, so results never depend on
//! the thread count.

use std::borrow::Cow;
use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{DescriptorSet, Neighbor, RetrievalResult};
use crate::metrics::DEFAULT_K;
use crate::synth::rng::PortableRng;
use crate::timing::TimingStats;

const LANES: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub k: usize,
    /// Scale every row to unit length before searching. When false, callers
    /// must pass unit-norm descriptors for the scores to be cosines.
    pub normalize_inputs: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            k: DEFAULT_K,
            normalize_inputs: true,
        }
    }
}

/// Dot product with a fixed 8-lane f32 accumulation order.
///
/// The summation tree is part of the contract: exactness tests compare
/// against oracles that call this same kernel. Negative zero is folded to
/// positive zero so that equal scores always tie.
#[inline]
pub fn dot(a: &[f32], b: &[f32]) -> f32 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = [0f32; LANES];
    let ca = a.chunks_exact(LANES);
    let cb = b.chunks_exact(LANES);
    let (ta, tb) = (ca.remainder(), cb.remainder());
    for (x, y) in ca.zip(cb) {
        for i in 0..LANES {
            acc[i] += x[i] * y[i];
        }
    }
    let mut tail = 0f32;
    for (x, y) in ta.iter().zip(tb) {
        tail += x * y;
    }
    let s = ((acc[0] + acc[4]) + (acc[1] + acc[5])) + ((acc[2] + acc[6]) + (acc[3] + acc[7]));
    (s + tail) + 0.0
}

/// Scales every row to unit Euclidean norm.
pub fn normalize(set: &DescriptorSet) -> Result<DescriptorSet> {
    let dim = set.dim();
    let mut data = Vec::with_capacity(set.data().len());
    for (row, &id) in set.rows().zip(set.ids()) {
        let norm = row.iter().map(|&v| (v as f64) * (v as f64)).sum::<f64>().sqrt();
        if norm == 0.0 {
            return Err(Error::ZeroNorm { id });
        }
        data.extend(row.iter().map(|&v| (v as f64 / norm) as f32));
    }
    Ok(DescriptorSet::from_parts_unchecked(set.ids().to_vec(), dim, data))
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    score: f32,
    pos: usize,
    id: u64,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    // Greater means worse: lower score, or equal score with a larger id.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .score
            .total_cmp(&self.score)
            .then(self.id.cmp(&other.id))
    }
}

fn search_one(query: &[f32], refs: &DescriptorSet, k: usize) -> Vec<Neighbor> {
    let mut heap: BinaryHeap<Candidate> = BinaryHeap::with_capacity(k + 1);
    for (pos, (row, &id)) in refs.rows().zip(refs.ids()).enumerate() {
        let c = Candidate {
            score: dot(query, row),
            pos,
            id,
        };
        if heap.len() < k {
            heap.push(c);
        } else if let Some(mut worst) = heap.peek_mut() {
            if c < *worst {
                *worst = c;
            }
        }
    }
    heap.into_sorted_vec()
        .into_iter()
        .map(|c| {
            debug_assert_eq!(refs.ids()[c.pos], c.id);
            Neighbor {
                ref_id: c.id,
                score: c.score as f64,
            }
        })
        .collect()
}

fn check_shapes(queries: &DescriptorSet, refs: &DescriptorSet, k: usize) -> Result<()> {
    if queries.dim() != refs.dim() {
        return Err(Error::DimensionMismatch {
            queries: queries.dim(),
            refs: refs.dim(),
        });
    }
    if k == 0 {
        return Err(Error::Config("k must be at least 1".into()));
    }
    if k > refs.len() {
        return Err(Error::KTooLarge {
            k,
            available: refs.len(),
        });
    }
    Ok(())
}

/// Top-k references for every query, best first, ties broken by ascending
/// reference id. Output order follows query order.
pub fn top_k_search(
    queries: &DescriptorSet,
    refs: &DescriptorSet,
    cfg: &SearchConfig,
) -> Result<Vec<RetrievalResult>> {
    check_shapes(queries, refs, cfg.k)?;
    let (queries, refs): (Cow<'_, DescriptorSet>, Cow<'_, DescriptorSet>) = if cfg.normalize_inputs {
        (Cow::Owned(normalize(queries)?), Cow::Owned(normalize(refs)?))
    } else {
        (Cow::Borrowed(queries), Cow::Borrowed(refs))
    };
    let refs = refs.as_ref();
    let results = queries
        .ids()
        .par_iter()
        .enumerate()
        .map(|(i, &qid)| {
            RetrievalResult::from_sorted_unchecked(qid, search_one(queries.row(i), refs, cfg.k))
        })
        .collect();
    Ok(results)
}

/// Times batch-size-1 searches of `queries` against `refs` (already normalized).
pub fn per_query_latency(
    queries: &DescriptorSet,
    refs: &DescriptorSet,
    k: usize,
) -> Result<(Vec<RetrievalResult>, Vec<Duration>)> {
    check_shapes(queries, refs, k)?;
    let mut results = Vec::with_capacity(queries.len());
    let mut samples = Vec::with_capacity(queries.len());
    for (i, &qid) in queries.ids().iter().enumerate() {
        let start = Instant::now();
        let nn = search_one(queries.row(i), refs, k);
        samples.push(start.elapsed());
        results.push(RetrievalResult::from_sorted_unchecked(qid, nn));
    }
    Ok((results, samples))
}

/// Searches `n_queries` random unit queries one at a time against `refs` and
/// reports the per-query latency.
pub fn batch_throughput_probe(
    refs: &DescriptorSet,
    n_queries: usize,
    k: usize,
    seed: u64,
) -> Result<TimingStats> {
    if refs.is_empty() {
        return Err(Error::Config("throughput probe needs at least one reference".into()));
    }
    let dim = refs.dim();
    let mut rng = PortableRng::new(seed);
    let data: Vec<f32> = (0..n_queries * dim).map(|_| rng.normal() as f32).collect();
    let ids = (0..n_queries as u64).collect();
    let queries = normalize(&DescriptorSet::new(ids, dim, data)?)?;
    let (_, samples) = per_query_latency(&queries, refs, k.min(refs.len()))?;
    TimingStats::from_durations(&samples)
        .ok_or_else(|| Error::Config("throughput probe needs at least one query".into()))
}
