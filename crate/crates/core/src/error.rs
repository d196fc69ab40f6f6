use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("transition matrix is not row-stochastic: {0}")]
    NotStochastic(String),

    #[error("chain has no unique limiting distribution (reducible or periodic)")]
    NotErgodic,

    #[error("stationary distribution did not converge after {0} iterations")]
    StationaryNotConverged(usize),

    #[error("insufficient replicates: need at least {need}, got {got}")]
    InsufficientReplicates { need: usize, got: usize },

    #[error("stationary mean lies outside the domain (distance {distance} > radius {radius})")]
    MeanOutsideDomain { distance: f64, radius: f64 },

    #[error("stationary moments are not available for this problem")]
    MissingStationaryMoments,

    #[error("trajectory does not retain per-step data")]
    MissingStepData,

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("config error (line {line}): {msg}")]
    Config { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config {
            line: 0,
            msg: msg.into(),
        }
    }

    /// Exit-code class used by the CLI: 2 for configuration problems,
    /// 3 for numerical failures, 1 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. }
            | Error::InvalidParameter(_)
            | Error::DimensionMismatch { .. }
            | Error::NotStochastic(_)
            | Error::NotErgodic
            | Error::MeanOutsideDomain { .. }
            | Error::MissingStationaryMoments
            | Error::InsufficientReplicates { .. } => 2,
            Error::Numerical(_) | Error::StationaryNotConverged(_) => 3,
            Error::MissingStepData | Error::Io(_) => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
