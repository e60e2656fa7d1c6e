use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("pole: {0}")]
    Pole(String),
    #[error("capacity exceeded: need {needed} qubits, cap is {cap}")]
    Capacity { needed: usize, cap: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("degenerate: {0}")]
    Degenerate(String),
    #[error("precision: {0}")]
    Precision(String),
    #[error("out of range: {0}")]
    Range(String),
    #[error("{0} is not an eigenvalue")]
    NotEigenvalue(String),
    #[error("logarithm branch cut hit: {0}")]
    LogBranch(String),
    #[error("no convergence: {0}")]
    Convergence(String),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, Error>;
