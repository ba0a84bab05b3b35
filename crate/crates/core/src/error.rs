use thiserror::Error;

/// Errors produced by the Motzkin chain toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A size parameter exceeds what the implementation will enumerate or store.
    #[error("resource limit exceeded: {what} = {value} (limit {limit})")]
    Resource {
        what: &'static str,
        value: usize,
        limit: usize,
    },
    /// A parameter lies outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),
    /// An imbalance class `(p, q)` that does not exist on a chain of length `n`.
    #[error("invalid class (p={p}, q={q}) for length {n}")]
    InvalidClass { n: usize, p: usize, q: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    /// An iterative eigensolver stopped before reaching its tolerance.
    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },
    #[error("fit error: {0}")]
    Fit(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
