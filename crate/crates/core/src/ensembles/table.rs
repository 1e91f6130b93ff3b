use alloc::vec::Vec;

use super::State;
use crate::linalg::{eig_hermitian, HermitianMatrix};
use crate::math;

/// One state of an enumerated ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub state: State,
    pub x: HermitianMatrix,
    pub weight: f64,
    /// Spectrum of `x`, ascending.
    pub eigenvalues: Vec<f64>,
}

impl Outcome {
    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues[self.eigenvalues.len() - 1]
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn spectral_norm(&self) -> f64 {
        self.lambda_max().abs().max(self.lambda_min().abs())
    }
}

/// Exact law of `X` over a finite state space.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeTable {
    dim: usize,
    entries: Vec<Outcome>,
}

impl OutcomeTable {
    pub(crate) fn from_outcomes<I: IntoIterator<Item = (State, HermitianMatrix, f64)>>(dim: usize, items: I) -> Self {
        let entries = items
            .into_iter()
            .map(|(state, x, weight)| {
                // Ensemble matrices are finite by construction, so Jacobi cannot
                // meet a NaN; non-convergence would be a solver bug.
                let eigenvalues = eig_hermitian(&x).expect("eigensolver failed on a finite matrix").eigenvalues().to_vec();
                Outcome { state, x, weight, eigenvalues }
            })
            .collect();
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[Outcome] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.entries.iter().map(|o| o.weight).sum()
    }

    /// `E f(outcome)`.
    pub fn expectation<F: Fn(&Outcome) -> f64>(&self, f: F) -> f64 {
        self.entries.iter().map(|o| o.weight * f(o)).sum()
    }

    /// `E g(outcome)` for a matrix-valued `g`.
    pub fn matrix_expectation<F: Fn(&Outcome) -> HermitianMatrix>(&self, f: F) -> HermitianMatrix {
        let terms: Vec<HermitianMatrix> = self.entries.iter().map(|o| f(o).scale(o.weight)).collect();
        HermitianMatrix::sum(self.dim, &terms)
    }

    pub fn mean(&self) -> HermitianMatrix {
        self.matrix_expectation(|o| o.x.clone())
    }

    pub fn mean_lambda_max(&self) -> f64 {
        self.expectation(Outcome::lambda_max)
    }

    pub fn mean_lambda_min(&self) -> f64 {
        self.expectation(Outcome::lambda_min)
    }

    /// `P(λ_max ≥ t)`.
    pub fn tail(&self, t: f64) -> f64 {
        self.expectation(|o| if o.lambda_max() >= t { 1.0 } else { 0.0 })
    }

    /// `P(λ_min ≤ −t)`.
    pub fn lower_tail(&self, t: f64) -> f64 {
        self.expectation(|o| if o.lambda_min() <= -t { 1.0 } else { 0.0 })
    }

    /// `P(‖X‖ ≥ t)`.
    pub fn norm_tail(&self, t: f64) -> f64 {
        self.expectation(|o| if o.spectral_norm() >= t { 1.0 } else { 0.0 })
    }

    /// `E ‖X‖_p^p = E tr |X|^p`.
    pub fn schatten_moment(&self, p: f64) -> f64 {
        self.expectation(|o| o.eigenvalues.iter().map(|&l| math::powf(math::abs(l), p)).sum())
    }

    /// `E tr̄ e^{θX}`.
    pub fn trace_mgf(&self, theta: f64) -> f64 {
        let d = self.dim as f64;
        self.expectation(|o| o.eigenvalues.iter().map(|&l| math::exp(theta * l)).sum::<f64>() / d)
    }

    pub fn log_trace_mgf(&self, theta: f64) -> f64 {
        math::ln(self.trace_mgf(theta))
    }
}
