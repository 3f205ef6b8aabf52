//! Newline-delimited JSON for retrieval results and scored records.
//!
//! A retrieval line is `{"q":<id>,"nn":[[ref,score],...]}`. Scored lines add
//! the metric values under `"u"` and the scoring parameters under `"meta"`,
//! so a scored file can be read back as plain retrieval results as well.

use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::Metric;

/// Tolerance on the cosine range when validating scores.
pub const SCORE_RANGE_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub ref_id: u64,
    pub score: f64,
}

/// Ordered top-m neighbors of one query, best first.
#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalResult {
    query_id: u64,
    neighbors: Vec<Neighbor>,
}

impl RetrievalResult {
    /// Validates the ordering invariants: at least one neighbor, finite scores
    /// within the cosine range, scores non-increasing with ties ordered by
    /// ascending `ref_id`, and unique `ref_id`s.
    pub fn new(query_id: u64, neighbors: Vec<Neighbor>) -> Result<Self> {
        if neighbors.is_empty() {
            return Err(Error::Validation(format!(
                "query {query_id}: neighbor list is empty"
            )));
        }
        let mut seen = HashSet::with_capacity(neighbors.len());
        for (rank, n) in neighbors.iter().enumerate() {
            if !n.score.is_finite() {
                return Err(Error::Validation(format!(
                    "query {query_id}: non-finite score at rank {}",
                    rank + 1
                )));
            }
            if n.score.abs() > 1.0 + SCORE_RANGE_SLACK {
                return Err(Error::Validation(format!(
                    "query {query_id}: score {} at rank {} is outside [-1, 1]",
                    n.score,
                    rank + 1
                )));
            }
            if !seen.insert(n.ref_id) {
                return Err(Error::Validation(format!(
                    "query {query_id}: reference {} appears twice",
                    n.ref_id
                )));
            }
        }
        for (rank, pair) in neighbors.windows(2).enumerate() {
            let (a, b) = (pair[0], pair[1]);
            if b.score > a.score {
                return Err(Error::Validation(format!(
                    "query {query_id}: scores not sorted descending at rank {}",
                    rank + 2
                )));
            }
            if b.score == a.score && b.ref_id < a.ref_id {
                return Err(Error::Validation(format!(
                    "query {query_id}: tied scores at rank {} not ordered by ascending ref id",
                    rank + 2
                )));
            }
        }
        Ok(Self {
            query_id,
            neighbors,
        })
    }

    pub(crate) fn from_sorted_unchecked(query_id: u64, neighbors: Vec<Neighbor>) -> Self {
        Self {
            query_id,
            neighbors,
        }
    }

    pub fn query_id(&self) -> u64 {
        self.query_id
    }

    pub fn neighbors(&self) -> &[Neighbor] {
        &self.neighbors
    }

    pub fn top(&self) -> Neighbor {
        self.neighbors[0]
    }

    pub fn scores(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.neighbors.iter().map(|n| n.score)
    }

    /// Copy keeping only the first `k` neighbors.
    pub fn truncated(&self, k: usize) -> Self {
        Self {
            query_id: self.query_id,
            neighbors: self.neighbors[..k.min(self.neighbors.len())].to_vec(),
        }
    }
}

/// Per-query uncertainty values; `predicted_ref` is the rank-1 neighbor.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyRecord {
    pub query_id: u64,
    pub predicted_ref: u64,
    pub values: BTreeMap<Metric, f64>,
}

impl UncertaintyRecord {
    pub fn get(&self, metric: Metric) -> Option<f64> {
        self.values.get(&metric).copied()
    }
}

/// Scoring parameters stamped on every scored line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreMeta {
    pub alpha: f64,
    pub k: usize,
    pub shift: bool,
}

/// A retrieval result together with its uncertainty values.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredResult {
    pub result: RetrievalResult,
    pub record: UncertaintyRecord,
    pub meta: ScoreMeta,
}

type WireParts = (RetrievalResult, Option<BTreeMap<Metric, f64>>, Option<ScoreMeta>);

#[derive(Serialize, Deserialize)]
struct WireLine {
    q: u64,
    nn: Vec<(u64, f64)>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    u: Option<BTreeMap<Metric, f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<ScoreMeta>,
}

impl WireLine {
    fn from_result(r: &RetrievalResult) -> Self {
        Self {
            q: r.query_id,
            nn: r.neighbors.iter().map(|n| (n.ref_id, n.score)).collect(),
            u: None,
            meta: None,
        }
    }

    fn into_result(self) -> Result<WireParts> {
        let neighbors = self
            .nn
            .into_iter()
            .map(|(ref_id, score)| Neighbor { ref_id, score })
            .collect();
        Ok((RetrievalResult::new(self.q, neighbors)?, self.u, self.meta))
    }
}

fn encode_line(w: &mut impl Write, line: &WireLine) -> std::io::Result<()> {
    serde_json::to_writer(&mut *w, line)?;
    w.write_all(b"\n")
}

pub fn write_results<'a>(
    path: impl AsRef<Path>,
    results: impl IntoIterator<Item = &'a RetrievalResult>,
) -> Result<()> {
    super::write_atomic(path.as_ref(), |w| {
        for r in results {
            encode_line(w, &WireLine::from_result(r))?;
        }
        Ok(())
    })
}

pub fn write_scored<'a>(
    path: impl AsRef<Path>,
    scored: impl IntoIterator<Item = &'a ScoredResult>,
) -> Result<()> {
    super::write_atomic(path.as_ref(), |w| {
        for s in scored {
            let mut line = WireLine::from_result(&s.result);
            line.u = Some(s.record.values.clone());
            line.meta = Some(s.meta);
            encode_line(w, &line)?;
        }
        Ok(())
    })
}

/// Line-numbered iterator over non-empty JSONL lines.
struct JsonLines<R> {
    lines: std::io::Lines<R>,
    lineno: usize,
}

impl<R: BufRead> Iterator for JsonLines<R> {
    type Item = Result<(usize, WireLine)>;

    fn next(&mut self) -> Option<Self::Item> {
        loop {
            let raw = self.lines.next()?;
            self.lineno += 1;
            let line = self.lineno;
            let raw = match raw {
                Ok(r) => r,
                Err(e) => {
                    return Some(Err(Error::Line {
                        line,
                        message: e.to_string(),
                    }))
                }
            };
            if raw.trim().is_empty() {
                continue;
            }
            return Some(
                serde_json::from_str::<WireLine>(&raw)
                    .map(|w| (line, w))
                    .map_err(|e| Error::Line {
                        line,
                        message: e.to_string(),
                    }),
            );
        }
    }
}

fn json_lines<R: BufRead>(reader: R) -> JsonLines<R> {
    JsonLines {
        lines: reader.lines(),
        lineno: 0,
    }
}

fn with_line<T>(line: usize, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Line { .. } => e,
        other => Error::Line {
            line,
            message: other.to_string(),
        },
    })
}

/// Streams retrieval results from any reader. Extra keys (`u`, `meta`) are ignored.
pub fn parse_results<R: BufRead>(reader: R) -> impl Iterator<Item = Result<RetrievalResult>> {
    json_lines(reader).map(|item| {
        let (line, wire) = item?;
        with_line(line, wire.into_result().map(|(r, _, _)| r))
    })
}

pub fn stream_results(path: impl AsRef<Path>) -> Result<impl Iterator<Item = Result<RetrievalResult>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_results(BufReader::new(file)))
}

pub fn read_results(path: impl AsRef<Path>) -> Result<Vec<RetrievalResult>> {
    stream_results(path)?.collect()
}

/// Streams scored lines; every line must carry `u` and `meta`, and metric
/// values must be finite.
pub fn parse_scored<R: BufRead>(reader: R) -> impl Iterator<Item = Result<ScoredResult>> {
    json_lines(reader).map(|item| {
        let (line, wire) = item?;
        with_line(line, scored_from_wire(wire))
    })
}

fn scored_from_wire(wire: WireLine) -> Result<ScoredResult> {
    let (result, u, meta) = wire.into_result()?;
    let values = u.ok_or_else(|| Error::Validation("missing \"u\" metric values".into()))?;
    let meta = meta.ok_or_else(|| Error::Validation("missing \"meta\" scoring parameters".into()))?;
    if let Some((m, v)) = values.iter().find(|(_, v)| !v.is_finite()) {
        return Err(Error::Validation(format!("metric {m} has non-finite value {v}")));
    }
    let record = UncertaintyRecord {
        query_id: result.query_id(),
        predicted_ref: result.top().ref_id,
        values,
    };
    Ok(ScoredResult {
        result,
        record,
        meta,
    })
}

pub fn stream_scored(path: impl AsRef<Path>) -> Result<impl Iterator<Item = Result<ScoredResult>>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_scored(BufReader::new(file)))
}

pub fn read_scored(path: impl AsRef<Path>) -> Result<Vec<ScoredResult>> {
    stream_scored(path)?.collect()
}
