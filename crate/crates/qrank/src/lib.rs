//! Classical and quantum PageRank on directed graphs.
//!
//! The classical side builds the Google matrix `G = alpha E + (1-alpha)/N`
//! and finds its stationary distribution by power iteration, continuous-time
//! diffusion, or a dense linear solve. The quantum side evolves a density
//! matrix under the Lindblad-Kossakowski generator with jump rates
//! `gamma_ij = G_ij`, so the stationary diagonal generalizes PageRank; at
//! mixing parameter `eps = 1` it reproduces the classical walk exactly,
//! which is the main correctness oracle. A spectral layer vectorizes the
//! generator into an `N^2 x N^2` matrix for kernel and gap analysis, and a
//! lattice layer models the photonic waveguide arrays that realize the walk,
//! including the ballistic-vs-diffusive spread diagnostic.

pub mod classical;
pub mod error;
pub mod export;
pub mod graph;
pub mod lattice;
pub mod quantum;
pub mod spectral;

pub use error::{Error, Result};
