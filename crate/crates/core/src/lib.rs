//! Surface reconstruction from a measured gradient field.
//!
//! Every reconstruction method in this crate (plain global least squares,
//! spectral truncation, Tikhonov, Dirichlet-constrained and covariance
//! weighted) reduces to one symmetric semi-definite Sylvester equation
//!
//! ```text
//! AᵀA Φ + Φ BᵀB − AᵀF − G B = 0
//! ```
//!
//! whose one-dimensional null space (the constant of integration), when
//! present, is removed by a pair of Householder reflections. See
//! [`reconstruct::reconstruct`] for the entry point and the `examples/`
//! directory of this crate for one runnable program per capability.

pub mod basis;
pub mod cli;
pub mod diffops;
pub mod error;
pub mod reconstruct;
pub mod regparam;
pub mod simulate;
pub mod sylvester;

pub use basis::{BasisFamily, BasisSet};
pub use diffops::{diff_matrix, DiffMatrix, GradientField, Surface};
pub use error::{Error, Result};
pub use reconstruct::{assemble, reconstruct, CovarianceSet, MethodSpec};
pub use regparam::SpectralCache;
pub use sylvester::SylvesterSystem;

/// Dense row-major-agnostic matrix type used throughout.
pub type Matrix = nalgebra::DMatrix<f64>;
/// Dense column vector.
pub type Vector = nalgebra::DVector<f64>;
