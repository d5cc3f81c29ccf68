//! Error type shared across the crate.

use thiserror::Error;

/// Errors produced by curve construction, kernel evaluation, quadrature and the flow.
#[derive(Debug, Error)]
pub enum Error {
    /// Input polygon cannot be interpolated (too few points, repeated vertices, ...).
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// Vectors passed to an operation do not share one ambient dimension.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The tail integral of the kernel diverges (power law needs alpha > 1).
    #[error("tail integral diverges for alpha = {alpha} (needs alpha > 1)")]
    TailDivergence { alpha: f64 },

    /// A derived quantity needs kernel derivatives the model does not carry.
    #[error("kernel has no {what} data")]
    MissingDerivative { what: &'static str },

    /// Energy densities are undefined on the diagonal s1 = s2.
    #[error("density requested on the diagonal cell i = j = {0}")]
    DiagonalSingularity(usize),

    /// A quadrature cell produced NaN or an overflow.
    #[error("numeric failure in cell ({i}, {j}): {what}")]
    NumericFailure { i: usize, j: usize, what: String },

    /// 1-D adaptive quadrature did not converge.
    #[error("quadrature failed: {0}")]
    Quadrature(String),

    /// Audit grid too coarse to say anything.
    #[error("insufficient audit grid: {0}")]
    InsufficientGrid(String),

    /// Finite-difference step destroyed the embedding of the perturbed curve.
    #[error("finite-difference step too large: {0}")]
    StepTooLarge(String),

    /// Line search rejected the maximum number of trial steps.
    #[error("flow stagnated after {rejections} rejected steps at step {step}")]
    Stagnation { step: usize, rejections: usize },

    /// The flow produced a curve the other modules cannot handle.
    #[error("flow aborted: {0}")]
    FlowAbort(String),

    /// Gamma function pole (circle closed form needs alpha < 3).
    #[error("closed form has a pole at alpha = {alpha} (needs alpha in (1, 3))")]
    GammaPole { alpha: f64 },

    /// Malformed user input (files, flags).
    #[error("invalid input: {0}")]
    Validation(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code for the CLI: 2 for validation problems, 3 for numeric failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::DegenerateInput(_)
            | Error::DimensionMismatch { .. }
            | Error::TailDivergence { .. }
            | Error::MissingDerivative { .. }
            | Error::InsufficientGrid(_)
            | Error::GammaPole { .. }
            | Error::Validation(_)
            | Error::Io(_)
            | Error::Json(_) => 2,
            Error::DiagonalSingularity(_)
            | Error::NumericFailure { .. }
            | Error::Quadrature(_)
            | Error::StepTooLarge(_)
            | Error::Stagnation { .. }
            | Error::FlowAbort(_) => 3,
        }
    }
}
