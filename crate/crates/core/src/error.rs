use thiserror::Error;

/// Errors raised by the simulation modules.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid basis dimension {0}: need at least 2 Fock levels")]
    InvalidDimension(usize),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("integrator step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },

    #[error("non-finite state at step {step} (t = {t})")]
    NumericalBlowup { step: usize, t: f64 },

    #[error("truncation alarm at t = {t}: tail occupation {tail:e} over the top 3 of {dim} levels")]
    Truncation { t: f64, tail: f64, dim: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("empty ensemble accumulator")]
    EmptyEnsemble,

    #[error("configuration error at `{key}`: {reason}")]
    Config { key: String, reason: String },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
