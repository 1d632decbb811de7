use thiserror::Error;

/// Errors raised by estimators, models and the experiment harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("empty weight set")]
    EmptyWeights,
    #[error("degenerate categorical: every weight is zero")]
    DegenerateCategorical,
    #[error("degenerate measure: every atom has zero weight")]
    DegenerateMeasure,
    #[error("degenerate estimate: {0} is not finite")]
    NonFiniteEstimate(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("acceptance probability too small: no acceptance after {0} attempts")]
    AcceptanceTooSmall(u64),
    #[error("insufficient points for fit: need at least {needed}, got {got}")]
    InsufficientPoints { needed: usize, got: usize },
    #[error("config error: {0}")]
    Config(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateCategorical
            | Error::DegenerateMeasure
            | Error::NonFiniteEstimate(_)
            | Error::AcceptanceTooSmall(_) => 3,
            Error::Io(_) => 1,
            _ => 2,
        }
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

pub type Result<T, E = Error> = std::result::Result<T, E>;
