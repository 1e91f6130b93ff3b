use alloc::vec::Vec;

use super::{eig_hermitian, hermitian_dilation, GeneralMatrix, HermitianMatrix, LinalgError};
use crate::math;

/// Matrices whose singular values can be computed with the Hermitian
/// eigensolver.
pub trait SingularValues {
    /// Singular values in descending order.
    fn singular_values(&self) -> Result<Vec<f64>, LinalgError>;
}

impl SingularValues for HermitianMatrix {
    fn singular_values(&self) -> Result<Vec<f64>, LinalgError> {
        let mut s: Vec<f64> = eig_hermitian(self)?.eigenvalues().iter().map(|l| math::abs(*l)).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        Ok(s)
    }
}

impl SingularValues for GeneralMatrix {
    /// The dilation has eigenvalues `±σ_i` padded with zeros, so the top
    /// `min(rows, cols)` eigenvalues are the singular values.
    fn singular_values(&self) -> Result<Vec<f64>, LinalgError> {
        let e = eig_hermitian(&hermitian_dilation(self))?;
        let k = self.rows().min(self.cols());
        Ok(e.eigenvalues().iter().rev().take(k).map(|&l| l.max(0.0)).collect())
    }
}

/// Schatten `p`-norm; `p = f64::INFINITY` gives the spectral norm.
pub fn schatten_norm<M: SingularValues + ?Sized>(a: &M, p: f64) -> Result<f64, LinalgError> {
    if !(p >= 1.0) {
        return Err(LinalgError::InvalidSchattenIndex(p));
    }
    let s = a.singular_values()?;
    let top = s.first().copied().unwrap_or(0.0);
    if p == f64::INFINITY || top == 0.0 {
        return Ok(top);
    }
    let acc: f64 = s.iter().map(|&x| math::powf(x / top, p)).sum();
    Ok(top * math::powf(acc, 1.0 / p))
}

pub fn spectral_norm<M: SingularValues + ?Sized>(a: &M) -> Result<f64, LinalgError> {
    schatten_norm(a, f64::INFINITY)
}

/// `(tr A, tr̄ A)`.
pub fn traces(a: &HermitianMatrix) -> (f64, f64) {
    let t: f64 = a.diagonal_re().iter().sum();
    (t, t / a.dim() as f64)
}

pub fn lambda_max(a: &HermitianMatrix) -> Result<f64, LinalgError> {
    Ok(eig_hermitian(a)?.lambda_max())
}

pub fn lambda_min(a: &HermitianMatrix) -> Result<f64, LinalgError> {
    Ok(eig_hermitian(a)?.lambda_min())
}

/// `A ⪯ B` up to `tol`, i.e. `λ_min(B − A) ≥ −tol`.
pub fn psd_leq(a: &HermitianMatrix, b: &HermitianMatrix, tol: f64) -> Result<bool, LinalgError> {
    if a.dim() != b.dim() {
        return Err(LinalgError::DimensionMismatch { left: a.dim(), right: b.dim() });
    }
    Ok(lambda_min(&(b - a))? >= -tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;
    use num_complex::Complex64;

    #[test]
    fn schatten_examples() {
        let i3 = HermitianMatrix::identity(3);
        assert!((schatten_norm(&i3, 2.0).unwrap() - 3f64.sqrt()).abs() < 1e-15);
        assert_eq!(schatten_norm(&HermitianMatrix::diag(&[3.0, -4.0]), f64::INFINITY).unwrap(), 4.0);
        let x = HermitianMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert!((schatten_norm(&x, 1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(schatten_norm(&x, 0.5).is_err());
        assert!(schatten_norm(&x, f64::NAN).is_err());
    }

    #[test]
    fn traces_examples() {
        assert_eq!(traces(&HermitianMatrix::identity(4)), (4.0, 1.0));
        assert_eq!(traces(&HermitianMatrix::diag(&[1.0, -1.0])), (0.0, 0.0));
        let a = HermitianMatrix::new(
            2,
            alloc::vec![
                Complex64::new(2.0, 0.0),
                Complex64::new(0.0, 1.0),
                Complex64::new(0.0, -1.0),
                Complex64::new(3.0, 0.0),
            ],
        )
        .unwrap();
        assert_eq!(traces(&a), (5.0, 2.5));
    }

    #[test]
    fn psd_order_examples() {
        let i = HermitianMatrix::identity(2);
        assert!(psd_leq(&i, &(2.0 * &i), 0.0).unwrap());
        assert!(!psd_leq(&HermitianMatrix::diag(&[1.0, -1.0]), &HermitianMatrix::zeros(2), 0.0).unwrap());
        assert!(psd_leq(&i, &HermitianMatrix::identity(3), 0.0).is_err());
    }

    #[test]
    fn rectangular_singular_values_match_gram_eigenvalues() {
        let mut rng = CounterRng::new(4);
        let data = (0..15).map(|_| Complex64::new(rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0))).collect();
        let b = GeneralMatrix::new(3, 5, data).unwrap();
        let gram = HermitianMatrix::from_general(&(&b * &b.adjoint())).unwrap();
        let mut expected: Vec<f64> = eig_hermitian(&gram).unwrap().eigenvalues().iter().map(|l| l.sqrt()).collect();
        expected.reverse();
        let got = b.singular_values().unwrap();
        for (g, e) in got.iter().zip(&expected) {
            assert!((g - e).abs() < 1e-10);
        }
        let d = hermitian_dilation(&b);
        assert!((spectral_norm(&d).unwrap() - got[0]).abs() < 1e-10);
    }
}
