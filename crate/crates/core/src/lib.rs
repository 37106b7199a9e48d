//! Operators built as linear combinations of permutations, the bit-flip and
//! phase-flip noise acting on them, and what that noise does to eigenvalues
//! and output states.
//!
//! * [`perm`]: permutations of qubit basis indices, Pauli-X/Z actions.
//! * [`operator`]: [`PermSum`] and the mixture error channels.
//! * [`spectral`]: eigensolver, eigenvalue error metrics, Gershgorin bounds.
//! * [`fidelity`]: output-state fidelities and singular-value bounds.
//! * [`decomposition`]: Sinkhorn scaling and Birkhoff extraction.
//! * [`harness`]: seeded Monte-Carlo sweeps and CSV output.

// `!(x > 0.0)` style checks are there to reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod decomposition;
pub mod dense;
pub mod error;
pub mod exec;
pub mod fidelity;
pub mod harness;
pub mod operator;
pub mod perm;
pub mod spectral;

pub use dense::{DenseMatrix, LinearOperator};
pub use error::{Error, Result};
pub use exec::Parallelism;
pub use fidelity::{StateMode, StateVector};
pub use operator::{CoefficientRange, ErrorSpec, PermSum, SignedPermTerm};
pub use perm::{Permutation, QubitMask};
pub use spectral::Spectrum;

pub use num_complex::Complex64;
