use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("{0} is not an odd prime below 2^31")]
    BadModulus(u64),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("modulus mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("enumeration budget exceeded: need {required}, budget {budget}")]
    BudgetExceeded { required: u128, budget: u128 },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("hypothesis not met: {0}")]
    HypothesisNotMet(String),
}

pub type Result<T> = std::result::Result<T, Error>;
