use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{num_users} users need orthogonal pilots but the pilot length is only {tau_p}")]
    PilotLength { num_users: usize, tau_p: usize },

    #[error("distance must be positive, got {0}")]
    NonPositiveDistance(f64),

    #[error("dimension mismatch in {context}: expected {expected}, got {actual}")]
    Dimension {
        context: String,
        expected: usize,
        actual: usize,
    },

    #[error("degenerate SINR coefficients: user {user} has zero useful-signal gain")]
    DegenerateCoefficients { user: usize },

    #[error("empty input: {0}")]
    Empty(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("content hash mismatch for {file}: manifest has {expected}, file has {actual}")]
    HashMismatch {
        file: PathBuf,
        expected: String,
        actual: String,
    },

    #[error("truncated or malformed file {file}: {detail}")]
    Truncated { file: PathBuf, detail: String },

    #[error("missing file {0}")]
    MissingFile(PathBuf),

    #[error("epoch {0} is not present in the training log")]
    MissingEpoch(usize),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        let path = path.into();
        if source.kind() == std::io::ErrorKind::NotFound {
            Error::MissingFile(path)
        } else {
            Error::Io { path, source }
        }
    }

    pub(crate) fn dim(context: impl Into<String>, expected: usize, actual: usize) -> Self {
        Error::Dimension {
            context: context.into(),
            expected,
            actual,
        }
    }

    /// True for failures of the numerical pipeline (as opposed to bad input or configuration).
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_) | Error::DegenerateCoefficients { .. })
    }
}
