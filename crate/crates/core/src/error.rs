use thiserror::Error;

use crate::problem::Violation;

pub type Result<T, E = SipError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum SipError {
    /// An argument lies outside the domain of the function it was passed to.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("degenerate box: {0}")]
    DegenerateBox(String),

    #[error("Slater margin is not positive (alpha = {alpha})")]
    SlaterMargin { alpha: f64 },

    #[error("problem failed validation: {}", format_violations(.0))]
    Validation(Vec<Violation>),

    #[error("invalid parameters: {0}")]
    Params(String),

    /// Non-finite value encountered inside the iteration loop.
    #[error("numerical failure at iteration {iteration}: {message}")]
    Numerical { iteration: usize, message: String },
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
