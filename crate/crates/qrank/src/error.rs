//! Error types shared across the crate.

use thiserror::Error;

use crate::quantum::DensityMatrix;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed input text (edge lists, config files).
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    /// A precondition or type invariant was violated.
    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// `(G - I) p = 0` has a kernel of dimension > 1, so the stationary
    /// distribution is not unique.
    #[error("stationary distribution is not unique: kernel dimension {kernel_dim}")]
    NonUniqueStationary { kernel_dim: usize },

    /// The Liouvillian kernel holds more than one steady state; all states
    /// that validate as density matrices are attached.
    #[error("steady state is not unique: kernel dimension {kernel_dim}")]
    NonUniqueSteadyState {
        kernel_dim: usize,
        states: Vec<DensityMatrix>,
    },

    /// An integrator left the physical manifold beyond tolerance.
    #[error("numerical instability: {0}")]
    NumericalInstability(String),

    /// A state failed density-matrix validation.
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A dense superoperator would exceed the configured size cap.
    #[error("graph has {dim} nodes, above the superoperator cap of {cap}; use time integration instead")]
    SizeCapExceeded { dim: usize, cap: usize },

    /// Probability reached the lattice edge during a spread measurement.
    #[error("boundary contamination: edge occupation {edge_probability:.3e} at t = {time}; use a larger lattice or shorter times")]
    BoundaryContamination { edge_probability: f64, time: f64 },

    /// Something that should be impossible for a Lindblad generator happened
    /// (e.g. no zero eigenvalue); indicates a bug rather than bad input.
    #[error("structural error: {0}")]
    Structural(String),

    #[error("linear algebra backend error: {0}")]
    LinAlg(#[from] ndarray_linalg::error::LinalgError),
}
