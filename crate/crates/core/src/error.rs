use thiserror::Error;

/// Errors produced across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("size limit exceeded: {what} would contain {count} items (cap {cap})")]
    SizeLimit { what: &'static str, count: u128, cap: u128 },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("evaluation produced a non-finite value {value} at {at}")]
    Evaluation { at: String, value: f64 },

    #[error("test set was built for a different domain")]
    DomainMismatch,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("LP solver failed: {0}")]
    Solver(String),

    #[error("LP is {0}")]
    LpStatus(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("point {0} is not on a sampled ray")]
    OffRay(String),

    #[error("oracle contract violated at step {step}: residual {residual} exceeds {bound}")]
    Oracle { step: usize, residual: f64, bound: f64 },

    #[error("verification failed: {0}")]
    Verification(String),
}

pub type Result<T> = std::result::Result<T, Error>;
