use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Malformed input file (ragged rows, empty file, bad DAG line).
    #[error("format error: {0}")]
    Format(String),

    /// An empty cell was found; only complete data is supported.
    #[error("missing data at row {row}, column {column}")]
    MissingData { row: usize, column: usize },

    #[error("invalid argument: {0}")]
    Argument(String),

    /// Special-function argument outside its domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// Observed counts fall on a parent configuration (or cell) with zero prior weight.
    #[error("data outside prior support: {0}")]
    PriorSupport(String),

    #[error("size limit exceeded: {0}")]
    Size(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
