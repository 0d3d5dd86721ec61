use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("basis is singular (Gram determinant {0:e})")]
    SingularBasis(f64),
    #[error("invalid basis: {0}")]
    InvalidBasis(String),
    #[error("enumeration budget exceeded: predicted {predicted:.0} items, cap {cap}")]
    BudgetExceeded { predicted: f64, cap: u64 },
    #[error("integer overflow while computing {0}")]
    Overflow(&'static str),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParam { name: &'static str, reason: String },
    #[error("Schatten exponent must satisfy r >= 1, got {0}")]
    InvalidR(f64),
    #[error("invalid use: {0}")]
    InvalidUse(String),
    #[error("index {0} lies in the kernel")]
    KernelIndex(String),
    #[error("probe lambda <= {probe} excludes candidate {candidate} (lambda = {lambda})")]
    ProbeTooSmall {
        probe: f64,
        candidate: String,
        lambda: f64,
    },
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("term {ordinal}: {reason}")]
    InvalidTerm { ordinal: usize, reason: String },
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParam {
            name,
            reason: reason.into(),
        }
    }
}
