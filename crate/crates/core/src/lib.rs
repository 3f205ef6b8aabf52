//! Training-free uncertainty estimation for visual place recognition.
//!
//! A retrieval returns the top-k most similar reference descriptors for a
//! query. The shape of those k similarity scores says a lot about whether the
//! rank-1 match can be trusted: a clear winner is usually right, a pack of
//! near-equal candidates usually means perceptual aliasing. This crate
//! provides
//!
//! * exact brute-force top-k cosine search ([`retrieval`]),
//! * score-distribution uncertainty metrics and baselines ([`metrics`]),
//! * failure-prediction evaluation: AUC-PR, rejection curves, ablations ([`eval`]),
//! * a seeded synthetic benchmark with brute-force oracles ([`synth`]),
//! * the on-disk formats shared by all of the above ([`io`]).
//!
//! ```
//! use vprunc::metrics::{rs, sd, su, ScoreVector, SuWeights};
//!
//! let s = ScoreVector::new(vec![0.9, 0.8, 0.7])?;
//! let u = su(&s, SuWeights::default())?;
//! assert!(u > sd(&s)?.min(rs(&s)?) - 1e-12);
//! # Ok::<(), vprunc::Error>(())
//! ```

pub mod bench;
pub mod cli;
pub mod error;
pub mod eval;
pub mod io;
pub mod manifest;
pub mod metrics;
pub mod pipeline;
pub mod retrieval;
pub mod synth;
pub mod timing;

pub use error::{Error, Result};
pub use eval::{auc_pr, label_matches, system_pr_curve, LabelingRule, MatchLabel, PrPoint};
pub use io::{DescriptorSet, Neighbor, Pose, PoseMode, PoseTable, RetrievalResult};
pub use metrics::{Metric, MetricConfig, ScoreVector, SuWeights};
pub use retrieval::{top_k_search, SearchConfig};
pub use synth::{generate, SynthConfig};
