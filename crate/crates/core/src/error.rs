use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the solving stack.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unsupported EDGE_WEIGHT_TYPE `{0}` (only EUC_2D is supported)")]
    UnsupportedMetric(String),

    #[error("invalid tour: {0}")]
    InvalidTour(String),

    #[error("self-loop ({0}, {0}) has no weight")]
    SelfLoop(usize),

    #[error("node index {index} out of range for n = {n}")]
    NodeOutOfRange { index: usize, n: usize },

    #[error("instance with n = {n} exceeds the {solver} limit of {max} nodes")]
    Capacity {
        solver: &'static str,
        n: usize,
        max: usize,
    },

    #[error("dimension mismatch: expected n = {expected}, found n = {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("regret file line {line}: {msg}")]
    RegretFormat { line: usize, msg: String },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    pub(crate) fn file(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::File {
            path: path.into(),
            source,
        }
    }
}
