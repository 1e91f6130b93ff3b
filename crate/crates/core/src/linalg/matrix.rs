use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::Zero;

use super::LinalgError;

/// Absolute per-entry tolerance for `a_jk == conj(a_kj)` at construction.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Dense row-major complex matrix of arbitrary shape.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl GeneralMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<Complex64>) -> Result<Self, LinalgError> {
        if rows == 0 || cols == 0 {
            return Err(LinalgError::EmptyDimension);
        }
        if data.len() != rows * cols {
            return Err(LinalgError::EntryCount { expected: rows * cols, found: data.len() });
        }
        if let Some(i) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LinalgError::NonFinite { row: i / cols, col: i % cols });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, values: &[f64]) -> Result<Self, LinalgError> {
        Self::new(rows, cols, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "matrix dimensions must be positive");
        Self { rows, cols, data: vec![Complex64::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.cols + col]
    }

    #[inline]
    pub(crate) fn set(&mut self, row: usize, col: usize, value: Complex64) {
        self.data[row * self.cols + col] = value;
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.get(i, j).conj();
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * factor).collect() }
    }

    pub fn frobenius_norm(&self) -> f64 {
        crate::math::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum::<f64>())
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "shape mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }
}

impl Add for &GeneralMatrix {
    type Output = GeneralMatrix;
    fn add(self, rhs: Self) -> GeneralMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &GeneralMatrix {
    type Output = GeneralMatrix;
    fn sub(self, rhs: Self) -> GeneralMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul for &GeneralMatrix {
    type Output = GeneralMatrix;
    fn mul(self, rhs: Self) -> GeneralMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        let mut out = GeneralMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs.get(k, j);
                }
            }
        }
        out
    }
}

/// Dense complex Hermitian matrix.
///
/// Construction checks hermiticity to [`HERMITICITY_TOL`] and then stores the
/// exact Hermitian part `(A + A*)/2`, so every value of this type is exactly
/// Hermitian in floating point.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    pub fn new(dim: usize, data: Vec<Complex64>) -> Result<Self, LinalgError> {
        let general = GeneralMatrix::new(dim, dim, data)?;
        Self::from_general(&general)
    }

    pub fn from_real(dim: usize, values: &[f64]) -> Result<Self, LinalgError> {
        Self::new(dim, values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// Checks hermiticity of a square matrix and symmetrizes it.
    pub fn from_general(m: &GeneralMatrix) -> Result<Self, LinalgError> {
        if m.rows != m.cols {
            return Err(LinalgError::DimensionMismatch { left: m.rows, right: m.cols });
        }
        let n = m.rows;
        for i in 0..n {
            for j in i..n {
                let residual = (m.get(i, j) - m.get(j, i).conj()).norm();
                if residual > HERMITICITY_TOL {
                    return Err(LinalgError::NotHermitian { row: i, col: j, residual });
                }
            }
        }
        Ok(Self::hermitian_part(m))
    }

    /// `(M + M*)/2` without any residual check. Used for products that are
    /// Hermitian in exact arithmetic (squares, congruences, sums).
    pub fn hermitian_part(m: &GeneralMatrix) -> Self {
        debug_assert_eq!(m.rows, m.cols);
        let n = m.rows;
        let mut data = vec![Complex64::zero(); n * n];
        for i in 0..n {
            data[i * n + i] = Complex64::new(m.get(i, i).re, 0.0);
            for j in (i + 1)..n {
                let v = (m.get(i, j) + m.get(j, i).conj()) * 0.5;
                data[i * n + j] = v;
                data[j * n + i] = v.conj();
            }
        }
        Self { dim: n, data }
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim > 0, "matrix dimension must be positive");
        Self { dim, data: vec![Complex64::zero(); dim * dim] }
    }

    pub fn identity(dim: usize) -> Self {
        Self::scalar(dim, 1.0)
    }

    pub fn scalar(dim: usize, value: f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = Complex64::new(value, 0.0);
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        let n = values.len();
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = Complex64::new(v, 0.0);
        }
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn to_general(&self) -> GeneralMatrix {
        GeneralMatrix { rows: self.dim, cols: self.dim, data: self.data.clone() }
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self { dim: self.dim, data: self.data.iter().map(|z| z * factor).collect() }
    }

    /// Matrix product; Hermitian only when the factors commute.
    pub fn mul(&self, rhs: &HermitianMatrix) -> GeneralMatrix {
        &self.to_general() * &rhs.to_general()
    }

    pub fn square(&self) -> Self {
        Self::hermitian_part(&self.mul(self))
    }

    /// `B A B*` for an arbitrary conformable `B`.
    pub fn congruence(&self, b: &GeneralMatrix) -> Self {
        let inner = &(b * &self.to_general()) * &b.adjoint();
        Self::hermitian_part(&inner)
    }

    pub fn diagonal_re(&self) -> Vec<f64> {
        (0..self.dim).map(|i| self.get(i, i).re).collect()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        crate::math::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum::<f64>())
    }

    /// Real Frobenius inner product `Re tr(A B)`.
    pub fn frobenius_inner(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        // tr(AB) = sum_ij a_ij b_ji = sum_ij a_ij conj(b_ij) for Hermitian B.
        self.data.iter().zip(&other.data).map(|(a, b)| (a * b.conj()).re).sum()
    }

    pub fn is_zero(&self, tol: f64) -> bool {
        self.max_abs() <= tol
    }

    pub fn sum<'a, I: IntoIterator<Item = &'a HermitianMatrix>>(dim: usize, items: I) -> Self {
        items.into_iter().fold(Self::zeros(dim), |acc, m| &acc + m)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| f(a, b)).collect();
        Self { dim: self.dim, data }
    }
}

impl Add for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn add(self, rhs: Self) -> HermitianMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn sub(self, rhs: Self) -> HermitianMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &HermitianMatrix {
    type Output = HermitianMatrix;
    fn neg(self) -> HermitianMatrix {
        self.scale(-1.0)
    }
}

impl Mul<&HermitianMatrix> for f64 {
    type Output = HermitianMatrix;
    fn mul(self, rhs: &HermitianMatrix) -> HermitianMatrix {
        rhs.scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let err = HermitianMatrix::new(2, vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, 1.0), c(2.0, 0.0)])
            .unwrap_err();
        assert!(matches!(err, LinalgError::NotHermitian { row: 0, col: 1, .. }));
    }

    #[test]
    fn rejects_non_finite_entries() {
        let err = HermitianMatrix::from_real(2, &[1.0, f64::NAN, f64::NAN, 0.0]).unwrap_err();
        assert_eq!(err, LinalgError::NonFinite { row: 0, col: 1 });
    }

    #[test]
    fn symmetrizes_small_residuals() {
        let m = HermitianMatrix::new(2, vec![c(1.0, 1e-14), c(0.5, 0.25), c(0.5, -0.25 + 1e-13), c(2.0, 0.0)])
            .unwrap();
        assert_eq!(m.get(0, 0).im, 0.0);
        assert_eq!(m.get(1, 0), m.get(0, 1).conj());
    }

    #[test]
    fn square_of_pauli_x_is_identity() {
        let x = HermitianMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        assert_eq!(x.square(), HermitianMatrix::identity(2));
    }

    #[test]
    fn frobenius_inner_matches_trace_of_product() {
        let a = HermitianMatrix::new(2, vec![c(2.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(3.0, 0.0)]).unwrap();
        let b = HermitianMatrix::new(2, vec![c(1.0, 0.0), c(1.0, 1.0), c(1.0, -1.0), c(-1.0, 0.0)]).unwrap();
        let tr = a.mul(&b).trace();
        assert!((a.frobenius_inner(&b) - tr.re).abs() < 1e-15);
        assert!(tr.im.abs() < 1e-15);
    }
}
