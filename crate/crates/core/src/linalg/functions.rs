use alloc::vec::Vec;
use core::fmt;

use super::{eig_hermitian, HermitianMatrix, LinalgError};
use crate::math;

/// Real interval used as the domain of a standard matrix function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
    pub hi_open: bool,
}

impl Interval {
    pub const fn real() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY, lo_open: true, hi_open: true }
    }

    /// `(0, ∞)`.
    pub const fn positive() -> Self {
        Self { lo: 0.0, hi: f64::INFINITY, lo_open: true, hi_open: true }
    }

    /// `[0, ∞)`.
    pub const fn nonnegative() -> Self {
        Self { lo: 0.0, hi: f64::INFINITY, lo_open: false, hi_open: true }
    }

    pub const fn closed(lo: f64, hi: f64) -> Self {
        Self { lo, hi, lo_open: false, hi_open: false }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_open { x > self.lo } else { x >= self.lo };
        let below = if self.hi_open { x < self.hi } else { x <= self.hi };
        above && below
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let l = if self.lo_open { '(' } else { '[' };
        let r = if self.hi_open { ')' } else { ']' };
        write!(f, "{l}{}, {}{r}", self.lo, self.hi)
    }
}

/// `Q f(Λ) Q*` for `A = Q Λ Q*`.
pub fn matrix_function<F: Fn(f64) -> f64>(
    a: &HermitianMatrix,
    f: F,
    domain: Interval,
) -> Result<HermitianMatrix, LinalgError> {
    let e = eig_hermitian(a)?;
    if let Some(&bad) = e.eigenvalues().iter().find(|&&l| !domain.contains(l)) {
        return Err(LinalgError::OutsideDomain { eigenvalue: bad, domain });
    }
    let mapped: Vec<f64> = e.eigenvalues().iter().map(|&l| f(l)).collect();
    Ok(e.reconstruct_with(&mapped))
}

pub fn expm(a: &HermitianMatrix) -> Result<HermitianMatrix, LinalgError> {
    matrix_function(a, math::exp, Interval::real())
}

/// Principal square root of a psd matrix. Eigenvalues down to `-1e-12` are
/// treated as rounding noise and mapped to zero.
pub fn matrix_sqrt_psd(a: &HermitianMatrix) -> Result<HermitianMatrix, LinalgError> {
    let e = eig_hermitian(a)?;
    if e.lambda_min() < -1e-12 * (1.0 + math::abs(e.lambda_max())) {
        return Err(LinalgError::NotPsd(e.lambda_min()));
    }
    let mapped: Vec<f64> = e.eigenvalues().iter().map(|&l| math::sqrt(l.max(0.0))).collect();
    Ok(e.reconstruct_with(&mapped))
}

/// Normalized matrix entropy `tr̄(W log W)` with `0 log 0 = 0`.
pub fn matrix_entropy(w: &HermitianMatrix) -> Result<f64, LinalgError> {
    let e = eig_hermitian(w)?;
    if e.lambda_min() < -1e-12 {
        return Err(LinalgError::NotPsd(e.lambda_min()));
    }
    let total: f64 = e
        .eigenvalues()
        .iter()
        .map(|&l| if l <= 0.0 { 0.0 } else { l * math::ln(l) })
        .sum();
    Ok(total / w.dim() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::GeneralMatrix;
    use num_complex::Complex64;

    #[test]
    fn exp_of_zero_is_identity() {
        let e = expm(&HermitianMatrix::zeros(3)).unwrap();
        assert!(e.max_abs_diff(&HermitianMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn abs_of_diagonal() {
        let a = HermitianMatrix::diag(&[-2.0, 3.0]);
        let r = matrix_function(&a, f64::abs, Interval::real()).unwrap();
        assert!(r.max_abs_diff(&HermitianMatrix::diag(&[2.0, 3.0])) < 1e-15);
    }

    #[test]
    fn exp_of_pauli_x_matches_taylor_series() {
        let a = HermitianMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let g = a.to_general();
        let mut term = GeneralMatrix::identity(2);
        let mut sum = GeneralMatrix::identity(2);
        for k in 1..30 {
            term = (&term * &g).scale(Complex64::new(1.0 / k as f64, 0.0));
            sum = &sum + &term;
        }
        let e = expm(&a).unwrap();
        assert!(e.to_general().max_abs_diff(&sum) < 1e-13);
        assert!((e.get(0, 0).re - 1.5430806348152437).abs() < 1e-13);
    }

    #[test]
    fn log_rejects_singular_input() {
        let a = HermitianMatrix::diag(&[0.0, 1.0]);
        let err = matrix_function(&a, math::ln, Interval::positive()).unwrap_err();
        assert!(matches!(err, LinalgError::OutsideDomain { eigenvalue, .. } if eigenvalue == 0.0));
    }

    #[test]
    fn entropy_conventions() {
        assert_eq!(matrix_entropy(&HermitianMatrix::diag(&[0.0, 2.0])).unwrap(), 2.0 * math::ln(2.0) / 2.0);
        assert!(matrix_entropy(&HermitianMatrix::diag(&[-1e-9, 1.0])).is_err());
    }

    #[test]
    fn sqrt_squares_back() {
        let a = HermitianMatrix::from_real(2, &[2.0, 1.0, 1.0, 2.0]).unwrap();
        let s = matrix_sqrt_psd(&a).unwrap();
        assert!(s.square().max_abs_diff(&a) < 1e-13);
    }
}
