//! Reflection positivity on the circle group, computed.
//!
//! Finite-dimensional implementations of reflection positive functions on
//! the circle `T_β = ℝ/βℤ`, their Laplace-transform representation by
//! operator-valued measures, GNS and Osterwalder–Schrader quantization,
//! euclidean realizations of unitary one-parameter groups, standard real
//! subspaces with their modular data, and KMS states of matrix algebras.
//!
//! Every construction comes with a numerical certificate (PSD margins,
//! residuals of identities) rather than a bare yes/no answer.

pub mod error;
pub mod gnsrep;
pub mod kms;
pub mod measures;
pub mod numcore;
pub mod random;
pub mod realization;
pub mod rpfunc;
pub mod standardsub;

pub use error::{Error, Result};
