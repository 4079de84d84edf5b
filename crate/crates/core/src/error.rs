use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("singular parameters: {0}")]
    SingularParameter(String),

    #[error("numerical failure at {location}: {message}")]
    NumericalFailure { location: String, message: String },

    #[error("divergence at iteration {iteration}: error grew from {initial:e} to {current:e}")]
    Divergence {
        iteration: usize,
        initial: f64,
        current: f64,
    },

    #[error("missing capability: {0}")]
    MissingCapability(&'static str),

    #[error("closed-form rate {closed_form:e} exceeds numerical maximum {numeric:e}")]
    CertificateInconsistency { closed_form: f64, numeric: f64 },

    #[error("configuration key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
