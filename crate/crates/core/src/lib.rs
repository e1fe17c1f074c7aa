//! Uncorrelated semi-paired two-view subspace learning.
//!
//! The crate learns per-view projection matrices `(P1, P2)` from two-view
//! data where only part of the samples are paired across views. Models are
//! assembled as trace-maximization problems with per-view quadratic
//! constraints and solved either by a successive alternating approximation
//! scheme ([`saa`]) built on sphere-constrained trust-region subproblems
//! ([`trs`]), or, for the baseline formulations, by a symmetric-definite
//! generalized eigenvalue solver ([`models::solve_gep`]).
//!
//! Modules:
//! - [`matkernels`] — dense symmetric linear-algebra primitives with
//!   explicit numerical contracts (Cholesky with a jitter ladder,
//!   symmetric eigendecomposition, thin SVD, Householder reflectors).
//! - [`trs`] — the equality-constrained trust-region subproblem
//!   `max_{|x|=1} x'Ax + 2b'x`, dense and Lanczos paths.
//! - [`saa`] — whitening, alternating maximization, Householder deflation,
//!   column recovery and final SVD alignment.
//! - [`models`] — covariance/scatter/Laplacian construction and the model
//!   builders for five uncorrelated models plus six GEP baselines.
//! - [`eval`] — semi-paired splits, nearest-neighbor evaluation and trial
//!   aggregation.
//!
//! With the default `parallel` feature, trial batches and the heavier
//! oracles run on rayon; without it everything falls back to sequential
//! loops with identical results.

pub mod error;
pub mod eval;
pub mod matkernels;
pub mod models;
pub mod saa;
pub mod trs;

pub use error::{Error, Result};
