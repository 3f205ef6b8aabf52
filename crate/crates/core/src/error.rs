use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// [`Error::is_io`] separates environment failures (missing files, permission
/// problems) from contract violations in the data or configuration; the CLI
/// maps the two classes to different exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("truncated descriptor file: expected {expected} bytes, found {found}")]
    Truncated { expected: u64, found: u64 },

    #[error("data error: {0}")]
    Data(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("line {line}: {message}")]
    Line { line: usize, message: String },

    #[error("dimension mismatch: queries have dim {queries}, references have dim {refs}")]
    DimensionMismatch { queries: usize, refs: usize },

    #[error("k = {k} exceeds the {available} available candidates")]
    KTooLarge { k: usize, available: usize },

    #[error("row with id {id} has zero norm and cannot be normalized")]
    ZeroNorm { id: u64 },

    #[error("top similarity score {score} is not positive; ratio metrics are undefined (enable shift mode to remap scores)")]
    NonPositiveTopScore { score: f64 },

    #[error("at least 2 candidates are required, got {got}")]
    InsufficientCandidates { got: usize },

    #[error("no pose for id {id}")]
    MissingPose { id: u64 },

    #[error("pose mode mismatch: expected {expected}, found {found}")]
    ModeMismatch {
        expected: &'static str,
        found: &'static str,
    },

    #[error("similarity weights sum to zero; spatial spread is undefined")]
    DegenerateWeights,

    #[error("average precision is undefined without any correct match")]
    NoPositives,

    #[error("length mismatch: {labels} labels vs {values} uncertainty values")]
    LengthMismatch { labels: usize, values: usize },

    #[error("configuration error: {0}")]
    Config(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the environment rather than of the data.
    pub fn is_io(&self) -> bool {
        matches!(self, Error::Io { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
