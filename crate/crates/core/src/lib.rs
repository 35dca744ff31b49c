//! Finite-dimensional symplectic linear algebra and the invariants built on it:
//! Maslov indices of Lagrangian paths, spectral flow of families of real
//! symmetric matrices, finite-rank parametrix paths, and bifurcation detection
//! for discretized variational families.
//!
//! Every invariant exposed here is computable by at least two independent
//! algorithms, and the test suites cross-validate them. The crate is organized
//! around the standard symplectic space `S(H) = R^n x R^n`:
//!
//! - [`symlin`]: subspace algebra, Lagrangian frames, graph correspondence.
//! - [`grassmann`]: Lagrangian paths, winding numbers, triple signatures,
//!   Hörmander indices, suspension.
//! - [`reduction`]: symplectic reduction modulo isotropic subspaces.
//! - [`specflow`]: spectral flow by four independent methods.
//! - [`parametrix`]: finite-rank corrector paths certifying invertibility.
//! - [`bifurcate`]: singular-set scans, crossing certificates, branch witnesses.
//!
//! All values are immutable after construction and all operations are pure
//! functions; data-parallel inner loops go through [`exec`], which falls back
//! to sequential execution when the `parallel` feature is disabled.

// Negated comparisons like `!(a < b)` are used on purpose: they reject NaN
// parameters along with out-of-order ones.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bifurcate;
pub mod error;
pub mod exec;
pub mod grassmann;
pub mod linalg;
pub mod parametrix;
pub mod pathgen;
pub mod reduction;
pub mod specflow;
pub mod symlin;
pub mod tol;

pub use error::{Error, Result};
pub use tol::Tol;
