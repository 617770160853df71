use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("ill-conditioned Gram matrix (condition number {cond:.3e})")]
    Singular { cond: f64 },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
