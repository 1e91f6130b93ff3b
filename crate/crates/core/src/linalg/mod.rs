//! Dense complex Hermitian matrix algebra.
//!
//! Everything here targets the small-dimension regime (d up to a few dozen)
//! that the exact verification oracles work in. One eigensolver, cyclic
//! complex Jacobi, backs every spectral quantity: matrix functions, Schatten
//! norms, the semidefinite order, and singular values of rectangular
//! matrices (through the Hermitian dilation).

mod dilation;
mod eig;
mod functions;
mod matrix;
mod norms;

use thiserror::Error;

pub use dilation::hermitian_dilation;
pub use eig::{eig_hermitian, EigenDecomposition, JACOBI_MAX_SWEEPS, JACOBI_RELATIVE_TOL};
pub use functions::{expm, matrix_entropy, matrix_function, matrix_sqrt_psd, Interval};
pub use matrix::{GeneralMatrix, HermitianMatrix, HERMITICITY_TOL};
pub use norms::{
    lambda_max, lambda_min, psd_leq, schatten_norm, spectral_norm, traces, SingularValues,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix dimensions must be positive")]
    EmptyDimension,
    #[error("expected {expected} entries, found {found}")]
    EntryCount { expected: usize, found: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("entry ({row}, {col}) breaks hermiticity by {residual:e}")]
    NotHermitian { row: usize, col: usize, residual: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal mass {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },
    #[error("eigenvalue {eigenvalue} lies outside the function domain {domain}")]
    OutsideDomain { eigenvalue: f64, domain: Interval },
    #[error("Schatten index must satisfy p >= 1, got {0}")]
    InvalidSchattenIndex(f64),
    #[error("matrix is not positive semidefinite (eigenvalue {0})")]
    NotPsd(f64),
}
