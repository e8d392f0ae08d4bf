use thiserror::Error;

use crate::schemes::IterateLog;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("not supported: {0}")]
    NotSupported(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    /// The adaptive stepper could not make progress. Carries the last accepted state.
    #[error("integration failed at t = {t}: {reason}")]
    IntegrationFailure {
        t: f64,
        state: Vec<f64>,
        reason: String,
    },

    #[error("oracle returned a non-finite value at t = {t}")]
    OracleFailure { t: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("bound not applicable: {0}")]
    BoundNotApplicable(String),

    /// Iterates blew up. The log is truncated at the last finite iterate.
    #[error("divergence detected at iteration {iteration}")]
    Diverged {
        iteration: usize,
        log: Box<IterateLog>,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag used in error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid-argument",
            Error::NotSupported(_) => "not-supported",
            Error::InvalidState(_) => "invalid-state",
            Error::IntegrationFailure { .. } => "integration-failure",
            Error::OracleFailure { .. } => "oracle-failure",
            Error::Domain(_) => "domain-error",
            Error::BoundNotApplicable(_) => "bound-not-applicable",
            Error::Diverged { .. } => "divergence-detected",
            Error::Config(_) => "config-error",
            Error::Io(_) => "io-error",
            Error::Json(_) => "json-error",
            Error::Csv(_) => "csv-error",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}
