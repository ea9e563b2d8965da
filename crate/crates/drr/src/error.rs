use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by estimator construction, evaluation, and file I/O.
#[derive(Debug, Error)]
pub enum Error {
    /// A point coordinate fell outside the unit box the basis is defined on.
    #[error("coordinate {index} = {value} lies outside [0, 1]")]
    OutOfDomain { index: usize, value: f64 },

    /// An argument violated a precondition (empty input, misaligned lengths, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Index-set enumeration would scan more candidates than the configured cap.
    #[error("index enumeration would scan {candidates} candidates (cap {cap})")]
    ResourceLimit { candidates: u128, cap: u64 },

    /// The operation is not available for this configuration.
    #[error("unsupported: {0}")]
    Unsupported(String),

    /// A numeric routine failed to reach its tolerance.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// Malformed file content; the message names the offending record.
    #[error("parse error: {0}")]
    Parse(String),

    /// Well-formed input that is unusable for the requested operation.
    #[error("data error: {0}")]
    Data(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit status for the CLI: 2 usage, 3 data, 4 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse(_) | Error::Data(_) | Error::Io { .. } => 3,
            Error::Numeric(_) => 4,
            _ => 2,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
