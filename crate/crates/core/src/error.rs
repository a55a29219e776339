use thiserror::Error;

/// Errors raised by the sampling library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid signal length {0}: must be a positive even integer")]
    InvalidSignalLength(usize),

    #[error("a sampling scheme needs at least one frequency")]
    EmptyScheme,

    #[error("non-finite frequency at position {0}")]
    NonFiniteFrequency(usize),

    #[error("signals must share the same length (expected {expected}, got {found})")]
    LengthMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("Tikhonov regularization requires lambda > 0 (got {0})")]
    InvalidLambda(f64),

    #[error("{0} is not defined for this reconstructor")]
    Unsupported(&'static str),

    #[error("non-finite objective at iteration {iteration}")]
    NonFinite {
        iteration: usize,
        /// Sampling scheme at which the objective blew up.
        xi: Vec<f64>,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
