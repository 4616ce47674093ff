//! Shared error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("sample set is empty")]
    EmptySampleSet,

    #[error("cluster {0} is empty")]
    EmptyCluster(usize),

    #[error("oracle evaluation failed at {point:?}: {reason}")]
    OracleFailure { point: Vec<f64>, reason: String },

    #[error("unsupported method: {0}")]
    UnsupportedMethod(String),

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("reference integral is zero; relative error undefined")]
    ZeroReference,

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("unsupported format version {found} (this build reads version {supported})")]
    VersionMismatch { found: u32, supported: u32 },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for configuration/input problems,
    /// 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidParameter(_)
            | Error::DimensionMismatch { .. }
            | Error::EmptySampleSet
            | Error::Io(_)
            | Error::Parse(_)
            | Error::VersionMismatch { .. }
            | Error::UnsupportedMethod(_) => 2,
            Error::EmptyCluster(_)
            | Error::OracleFailure { .. }
            | Error::NonConvergence(_)
            | Error::ZeroReference => 3,
        }
    }
}
