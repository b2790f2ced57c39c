use thiserror::Error;

/// Errors raised by the estimation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("inadmissible path at index {index}: {prev} -> {next}")]
    Inadmissible { index: usize, prev: u64, next: u64 },

    #[error("path too short: need at least {needed} observed generations, got {got}")]
    PathTooShort { needed: usize, got: usize },

    #[error("population overflow at generation {generation}")]
    Overflow { generation: usize },

    #[error("numerical overflow: {0}")]
    NumericalOverflow(String),

    #[error("quadrature did not converge after {evaluations} evaluations on [{lo}, {hi}] (error estimate {error:e})")]
    Quadrature {
        evaluations: usize,
        lo: f64,
        hi: f64,
        error: f64,
    },
}

impl Error {
    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Overflow { .. } | Error::NumericalOverflow(_) | Error::Quadrature { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
