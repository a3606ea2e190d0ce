use thiserror::Error;

/// Errors raised by the analytic solvers and the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    #[error("overlap q = {q} outside {domain}")]
    OverlapOutOfDomain { q: f64, domain: &'static str },

    #[error("no sign change on [{lo}, {hi}]: f(lo) = {f_lo}, f(hi) = {f_hi}")]
    NoBracket { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("inconsistent inputs: {0}")]
    Inconsistent(String),

    #[error("disorder tensor of {entries} entries ({bytes} bytes) exceeds the budget of {budget} entries")]
    SizeExceeded { entries: u128, bytes: u128, budget: u64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("at beta = {beta}: {source}")]
    AtBeta { beta: f64, source: Box<Error> },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },

    #[error("malformed disorder file: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument { name, reason: reason.into() }
}
