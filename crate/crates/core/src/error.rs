//! Crate-wide error type.

use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A line could not be split or its fields could not be parsed.
    #[error("{source_name}:{line}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        message: String,
    },

    /// Input parsed but violates a data invariant (duplicate doc, NaN score, ...).
    #[error("{source_name}:{line}: {message}")]
    Validation {
        source_name: String,
        line: usize,
        message: String,
    },

    #[error("{source_name}:{line}: grade {grade} outside the 0..=3 scale")]
    GradeRange {
        source_name: String,
        line: usize,
        grade: i64,
    },

    #[error("invalid manifest: {0}")]
    Manifest(String),

    #[error("cannot build a pool from an empty run set")]
    EmptyRunSet,

    #[error("cannot split {scope}: {reason}")]
    SplitImpossible { scope: String, reason: String },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid paired scores: {0}")]
    PairedScores(String),

    /// Kendall's tau has a zero denominator (one side is constant).
    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(&'static str),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Stream(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
