//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum AvcError {
    /// Probability weight lost to the Fock cutoff exceeded the tolerance.
    #[error("truncation deficit {deficit:.3e} exceeds tolerance {tolerance:.3e} at cutoff {dim}")]
    Truncation {
        deficit: f64,
        tolerance: f64,
        dim: usize,
    },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    /// An eigenvalue fell below the clipping floor, i.e. the matrix is not a
    /// roundoff-perturbed state but genuinely indefinite.
    #[error("eigenvalue {value:.3e} below the negativity floor {floor:.3e}")]
    NegativeEigenvalue { value: f64, floor: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    /// The first argument of the relative entropy has mass outside the
    /// support of the second.
    #[error("support mismatch: {mass:.3e} of the state lies outside the reference support")]
    SupportMismatch { mass: f64 },

    #[error("no jammer family to search")]
    EmptyFamily,

    #[error("rejection budget exhausted after {tries} draws ({accepted}/{needed} accepted)")]
    RejectionBudget {
        tries: usize,
        accepted: usize,
        needed: usize,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("numerical budget exceeded: {0}")]
    NumericalBudget(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, AvcError>;
