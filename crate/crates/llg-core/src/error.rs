//! Error taxonomy shared by the whole crate.
//!
//! Invariant violations and solver failures are kept apart because the CLI
//! maps them to distinct exit codes (2 and 3).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("linear solver failure: {0}")]
    Solve(#[from] SolveError),

    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("time step {step} failed: {source}")]
    Step { step: usize, source: Box<Error> },
}

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("sparse factorization failed: {0}")]
    Factorization(String),

    #[error("solution rejected: relative residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },

    #[error(
        "gmres stalled after {iters} iterations: relative residual {residual:e} (tolerance {tol:e})"
    )]
    NoConvergence { iters: usize, residual: f64, tol: f64 },

    #[error("solution contains non-finite entries")]
    NonFinite,
}

impl Error {
    /// Process exit code the CLI reports for this error class.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Invariant(_) => 2,
            Error::Solve(_) => 3,
            Error::Step { source, .. } => source.exit_code(),
            _ => 1,
        }
    }

    /// Tags an error with the time step in which it occurred.
    pub fn with_step_context(self, step: usize) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }
}
