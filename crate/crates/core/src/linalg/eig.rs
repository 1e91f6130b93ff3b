use alloc::vec::Vec;

use num_complex::Complex64;

use super::{GeneralMatrix, HermitianMatrix, LinalgError};
use crate::math;

/// Sweep limit for the cyclic Jacobi iteration.
pub const JACOBI_MAX_SWEEPS: usize = 50;
/// Iteration stops once the off-diagonal Frobenius mass falls below this
/// multiple of the input's Frobenius norm.
pub const JACOBI_RELATIVE_TOL: f64 = 1e-14;

/// `A = Q diag(λ) Q*` with eigenvalues sorted ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    unitary: GeneralMatrix,
}

impl EigenDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Columns are the eigenvectors, in the order of [`Self::eigenvalues`].
    pub fn unitary(&self) -> &GeneralMatrix {
        &self.unitary
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    /// `Q diag(values) Q*`.
    pub fn reconstruct_with(&self, values: &[f64]) -> HermitianMatrix {
        assert_eq!(values.len(), self.dim());
        let n = self.dim();
        let q = &self.unitary;
        let mut out = GeneralMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for (k, &v) in values.iter().enumerate() {
                    if v != 0.0 {
                        acc += q.get(i, k) * q.get(j, k).conj() * v;
                    }
                }
                out.set(i, j, acc);
                out.set(j, i, acc.conj());
            }
        }
        HermitianMatrix::hermitian_part(&out)
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.reconstruct_with(&self.eigenvalues)
    }
}

/// Eigendecomposition of a Hermitian matrix by cyclic complex Jacobi
/// rotations.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary, then applies the real symmetric Jacobi rotation that annihilates
/// it. Deterministic for a fixed input.
pub fn eig_hermitian(a: &HermitianMatrix) -> Result<EigenDecomposition, LinalgError> {
    let n = a.dim();
    let mut m: Vec<Complex64> = a.data().to_vec();
    let mut v = GeneralMatrix::identity(n);

    let scale = a.frobenius_norm();
    let tol = JACOBI_RELATIVE_TOL * scale;
    let mut converged = off_diagonal_norm(&m, n) <= tol;
    let mut sweeps = 0;
    while !converged && sweeps < JACOBI_MAX_SWEEPS {
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut m, &mut v, n, p, q);
            }
        }
        converged = off_diagonal_norm(&m, n) <= tol;
    }
    if !converged {
        return Err(LinalgError::NoConvergence { sweeps, off_norm: off_diagonal_norm(&m, n) });
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| m[i * n + i].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let eigenvalues = order.iter().map(|&i| diag[i]).collect();
    let mut unitary = GeneralMatrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        for row in 0..n {
            unitary.set(row, new_col, v.get(row, old_col));
        }
    }
    Ok(EigenDecomposition { eigenvalues, unitary })
}

fn off_diagonal_norm(m: &[Complex64], n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[i * n + j].norm_sqr();
            }
        }
    }
    math::sqrt(acc)
}

fn rotate(m: &mut [Complex64], v: &mut GeneralMatrix, n: usize, p: usize, q: usize) {
    let apq = m[p * n + q];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = m[p * n + p].re;
    let aqq = m[q * n + q].re;
    let phase_conj = (apq / mag).conj();

    let tau = (aqq - app) / (2.0 * mag);
    let t = if math::abs(tau) > 1e150 {
        0.5 / tau
    } else {
        let r = 1.0 / (math::abs(tau) + math::sqrt(1.0 + tau * tau));
        if tau < 0.0 {
            -r
        } else {
            r
        }
    };
    let c = 1.0 / math::sqrt(1.0 + t * t);
    let s = t * c;

    // U = diag(1, e^{-iφ}) · [[c, s], [-s, c]] restricted to rows/cols (p, q).
    let u_pp = Complex64::new(c, 0.0);
    let u_pq = Complex64::new(s, 0.0);
    let u_qp = phase_conj * (-s);
    let u_qq = phase_conj * c;

    // M <- M U
    for k in 0..n {
        let mkp = m[k * n + p];
        let mkq = m[k * n + q];
        m[k * n + p] = mkp * u_pp + mkq * u_qp;
        m[k * n + q] = mkp * u_pq + mkq * u_qq;
    }
    // M <- U* M
    for k in 0..n {
        let mpk = m[p * n + k];
        let mqk = m[q * n + k];
        m[p * n + k] = u_pp.conj() * mpk + u_qp.conj() * mqk;
        m[q * n + k] = u_pq.conj() * mpk + u_qq.conj() * mqk;
    }
    m[p * n + q] = Complex64::new(0.0, 0.0);
    m[q * n + p] = Complex64::new(0.0, 0.0);
    m[p * n + p].im = 0.0;
    m[q * n + q].im = 0.0;

    // V <- V U
    for k in 0..n {
        let vkp = v.get(k, p);
        let vkq = v.get(k, q);
        v.set(k, p, vkp * u_pp + vkq * u_qp);
        v.set(k, q, vkp * u_pq + vkq * u_qq);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;
    use alloc::vec;

    fn random_hermitian(rng: &mut CounterRng, n: usize) -> HermitianMatrix {
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = Complex64::new(rng.uniform_in(-1.0, 1.0), 0.0);
            for j in (i + 1)..n {
                let z = Complex64::new(rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0));
                data[i * n + j] = z;
                data[j * n + i] = z.conj();
            }
        }
        HermitianMatrix::new(n, data).unwrap()
    }

    #[test]
    fn pauli_x_spectrum() {
        let a = HermitianMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let e = eig_hermitian(&a).unwrap();
        assert!((e.eigenvalues()[0] + 1.0).abs() < 1e-15);
        assert!((e.eigenvalues()[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn diagonal_input_gives_permuted_identity() {
        let a = HermitianMatrix::diag(&[5.0, 2.0, 7.0]);
        let e = eig_hermitian(&a).unwrap();
        assert_eq!(e.eigenvalues(), &[2.0, 5.0, 7.0]);
        let q = e.unitary();
        for col in 0..3 {
            let ones = (0..3).filter(|&r| (q.get(r, col).norm() - 1.0).abs() < 1e-15).count();
            let zeros = (0..3).filter(|&r| q.get(r, col).norm() < 1e-15).count();
            assert_eq!((ones, zeros), (1, 2));
        }
        assert_eq!(q.get(1, 0).re, 1.0);
    }

    #[test]
    fn random_complex_8x8_reconstructs() {
        let mut rng = CounterRng::new(11);
        for _ in 0..20 {
            let a = random_hermitian(&mut rng, 8);
            let e = eig_hermitian(&a).unwrap();
            let norm = e.eigenvalues().iter().fold(0.0f64, |m, x| m.max(x.abs()));
            assert!(e.reconstruct().max_abs_diff(&a) < 1e-10 * (1.0 + norm));
            let q = e.unitary();
            let gram = &q.adjoint() * q;
            assert!(gram.max_abs_diff(&GeneralMatrix::identity(8)) < 1e-10);
            assert!(e.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn zero_and_one_by_one_inputs() {
        let e = eig_hermitian(&HermitianMatrix::zeros(3)).unwrap();
        assert_eq!(e.eigenvalues(), &[0.0, 0.0, 0.0]);
        let e = eig_hermitian(&HermitianMatrix::scalar(1, -4.5)).unwrap();
        assert_eq!(e.eigenvalues(), &[-4.5]);
    }

    #[test]
    fn deterministic_for_fixed_input() {
        let mut rng = CounterRng::new(3);
        let a = random_hermitian(&mut rng, 6);
        assert_eq!(eig_hermitian(&a).unwrap(), eig_hermitian(&a).unwrap());
    }

    #[test]
    fn clustered_and_large_spread_spectra() {
        let a = HermitianMatrix::from_real(3, &[1e8, 1e-3, 0.0, 1e-3, 1.0, 1e-9, 0.0, 1e-9, 1.0 + 1e-12])
            .unwrap();
        let e = eig_hermitian(&a).unwrap();
        assert!(e.reconstruct().max_abs_diff(&a) < 1e-10 * (1.0 + 1e8));
    }
}
