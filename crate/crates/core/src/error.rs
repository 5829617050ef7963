//! Crate-wide error type.

use thiserror::Error;

/// Everything that can go wrong while building models or solving for effort.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument outside its domain: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { eigenvalue: f64 },

    #[error("matrix is singular (pivot {pivot:e} in column {column})")]
    Singular { column: usize, pivot: f64 },

    #[error("covariance is not positive definite (smallest eigenvalue {min_eigenvalue:e})")]
    SingularCovariance { min_eigenvalue: f64 },

    #[error("causal graph contains a cycle: {}", .0.join(" -> "))]
    CycleDetected(Vec<String>),

    #[error("malformed input: {0}")]
    Schema(String),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("effort profile is identically zero")]
    ZeroEffort,

    #[error("no effort profile satisfies the constraint{}", threshold_note(.threshold_delta))]
    Infeasible { threshold_delta: Option<f64> },

    #[error("expected exactly one desirable feature, found {0}")]
    Partition(usize),

    #[error("influence path of length {0} makes the contribution vector non-Gaussian")]
    DepthExceeded(usize),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("iteration limit of {0} reached")]
    IterationLimit(usize),

    #[error("unknown classifier {0:?} (expected DM, HPL, HPT or Obesity)")]
    UnknownClassifier(String),
}

fn threshold_note(threshold: &Option<f64>) -> String {
    match threshold {
        Some(t) => format!(" (failure tolerance must exceed {t})"),
        None => String::new(),
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, got })
    }
}
