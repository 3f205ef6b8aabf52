//! Quadratic reference implementations used to check the fast paths.
//!
//! Both oracles reuse only the scalar building blocks of the main code (the
//! dot-product kernel, the label type); selection, ordering and counting are
//! done independently.

use crate::error::{Error, Result};
use crate::eval::MatchLabel;
use crate::io::{DescriptorSet, Neighbor, RetrievalResult};
use crate::retrieval::dot;

/// Scores every reference, fully sorts by (score desc, id asc) and keeps `k`.
/// Inputs are used as given, without normalization.
pub fn oracle_topk(
    queries: &DescriptorSet,
    refs: &DescriptorSet,
    k: usize,
) -> Result<Vec<RetrievalResult>> {
    if queries.dim() != refs.dim() {
        return Err(Error::DimensionMismatch {
            queries: queries.dim(),
            refs: refs.dim(),
        });
    }
    let mut out = Vec::with_capacity(queries.len());
    for (q, &qid) in queries.rows().zip(queries.ids()) {
        let mut all: Vec<(f32, u64)> = refs
            .rows()
            .zip(refs.ids())
            .map(|(r, &id)| (dot(q, r), id))
            .collect();
        all.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        all.truncate(k);
        let nn = all
            .into_iter()
            .map(|(score, ref_id)| Neighbor {
                ref_id,
                score: score as f64,
            })
            .collect();
        out.push(RetrievalResult::new(qid, nn)?);
    }
    Ok(out)
}

/// Average precision by direct counting.
///
/// For every correct query the threshold "accept everything ranked at or
/// before it" is evaluated from confusion counts: correct queries count if
/// strictly less uncertain, or tied with an id not greater; incorrect ones
/// count if not more uncertain (ties resolve against the prediction). The
/// per-threshold precisions are summed in ascending (uncertainty, id) order
/// so the floating-point result is reproducible.
pub fn oracle_ap(labels: &[MatchLabel], uncertainties: &[f64]) -> Result<f64> {
    if labels.len() != uncertainties.len() {
        return Err(Error::LengthMismatch {
            labels: labels.len(),
            values: uncertainties.len(),
        });
    }
    let mut positives: Vec<(f64, u64, usize)> = labels
        .iter()
        .zip(uncertainties)
        .enumerate()
        .filter(|(_, (l, _))| l.correct)
        .map(|(i, (l, &u))| (u, l.query_id, i))
        .collect();
    if positives.is_empty() {
        return Err(Error::NoPositives);
    }
    positives.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut sum = 0.0;
    for &(u, qid, _) in &positives {
        let mut tp = 0usize;
        let mut fp = 0usize;
        for (l, &v) in labels.iter().zip(uncertainties) {
            if l.correct {
                if v < u || (v == u && l.query_id <= qid) {
                    tp += 1;
                }
            } else if v <= u {
                fp += 1;
            }
        }
        sum += tp as f64 / (tp + fp) as f64;
    }
    Ok(sum / positives.len() as f64)
}
