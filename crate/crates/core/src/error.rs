use std::path::PathBuf;

use thiserror::Error;

/// Every failure the engine can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("label must be 0 or 1, got {0}")]
    Label(f64),

    #[error("invalid state: {0}")]
    State(&'static str),

    #[error("cannot pool an empty sequence of vectors")]
    EmptySequence,

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("record '{id}': field '{field}' has dimension {actual}, manifest requires {expected}")]
    DimMismatch {
        id: String,
        field: String,
        expected: usize,
        actual: usize,
    },

    #[error("record '{id}': {message}")]
    InvalidRecord { id: String, message: String },

    #[error("cannot balance classes: {0}")]
    Balance(String),

    #[error("cannot plan folds: {0}")]
    Fold(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("training failed: {0}")]
    Training(String),

    #[error("paired samples differ in length: {0} vs {1}")]
    Pairing(usize, usize),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
