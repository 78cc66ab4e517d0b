use thiserror::Error;

/// Errors raised by the library. Variants are grouped so that front ends can
/// tell configuration mistakes apart from failures during a computation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("beta = {beta} lies in the excluded regime 0 < beta < 1 (collisions); use beta = 0 or beta >= 1")]
    ExcludedRegime { beta: f64 },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate law at t = 0: {0}")]
    Degenerate(String),

    #[error("curve stays above {eta} up to the horizon t = {horizon}")]
    Horizon { eta: f64, horizon: f64 },

    #[error("no convergence: {0}")]
    NonConvergence(String),

    #[error("step failure in replica {replica} at t = {t}: {reason}")]
    StepFailure { replica: u64, t: f64, reason: String },

    #[error("data quality: {0}")]
    DataQuality(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by the request itself rather than the run.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidArgument(_)
                | Error::DimensionMismatch { .. }
                | Error::ExcludedRegime { .. }
                | Error::Unsupported(_)
                | Error::Domain(_)
        )
    }

    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
