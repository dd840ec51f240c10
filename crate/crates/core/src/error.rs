use thiserror::Error;

/// Errors produced anywhere in the workbench.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("radicand mismatch: {0} vs {1}")]
    RadicandMismatch(u64, u64),

    #[error("invalid radicand {0}: must be a positive non-square integer")]
    InvalidRadicand(u64),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("line {line}: {message}")]
    FileFormat { line: usize, message: String },

    #[error("malformed system: {0}")]
    MalformedSystem(String),

    #[error("unknown system `{0}`")]
    UnknownSystem(String),

    #[error("map index {index} out of range 1..={count}")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("level {level} exceeds budget {budget} for system `{system}`")]
    BudgetExceeded { system: String, level: u32, budget: u32 },

    #[error("system `{0}` has not passed validation")]
    Unvalidated(String),

    #[error("invalid vertex set: {0}")]
    InvalidSet(String),

    #[error("graph is disconnected")]
    Disconnected,

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("dimension bisection did not converge; final bracket [{lo}, {hi}]")]
    DimensionBracket { lo: f64, hi: f64 },

    #[error("dense oracle limited to {cap} vertices, got {size}")]
    OracleTooLarge { size: usize, cap: usize },

    #[error("gluing specification: {0}")]
    Gluing(String),

    #[error("gluing `{0}` has not passed continuity verification")]
    UnverifiedGluing(String),

    #[error("claim derivation failed at step `{step}`: {reason}")]
    Derivation { step: String, reason: String },

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
