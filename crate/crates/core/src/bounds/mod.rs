//! Closed-form tail, mean, moment and trace-mgf bounds.
//!
//! Formulas are evaluated exactly as stated; probabilities are clamped to
//! `[0, 1]` only when read through a [`BoundSet`].

mod mgf;
mod moments;
mod tail;

use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::math;

pub use mgf::{
    laplace_bound, mgf_bound_bounded, mgf_bound_bounded_loose, mgf_bound_refined, theta_star,
    LaplaceSide, ThetaRange, LAPLACE_GRID_POINTS,
};
pub use moments::{bdg_bound, khintchine, rosenthal_hermitian, rosenthal_psd, MomentOrder};
pub use tail::{
    bernstein, bounded_concentration, bounded_differences, chebyshev_tail, combinatorial_bernstein,
    hoeffding, rectangular_bernstein, refined_concentration, CombinatorialSummary, PSD_TOL,
    ZERO_TOTAL_TOL,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BoundError {
    #[error("parameter {name} = {value} is invalid: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    #[error("threshold must be nonnegative, got {0}")]
    NegativeThreshold(f64),
    #[error("input list is empty")]
    EmptyInput,
    #[error("matrix {index} is not positive semidefinite (eigenvalue {eigenvalue:e})")]
    NotPsd { index: usize, eigenvalue: f64 },
    #[error("dimension mismatch at matrix {index}: expected {expected}, found {found}")]
    DimensionMismatch { index: usize, expected: usize, found: usize },
    #[error("row {row} has {found} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, found: usize },
    #[error("array entries do not sum to zero (largest entry of the total is {0:e})")]
    NonzeroTotal(f64),
    #[error("theta = {theta} is outside the domain of the mgf bound (limit {limit})")]
    OutsideMgfDomain { theta: f64, limit: f64 },
    #[error("moment order p = {0} is not supported (need p = 1 or p >= 1.5, or the extended flag for 1 < p < 1.5)")]
    InvalidMomentOrder(f64),
    #[error("empty theta range [{min}, {max}]")]
    EmptyThetaRange { min: f64, max: f64 },
    #[error("mgf curve is not finite at theta = {0}")]
    NonFiniteCurve(f64),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Which result a [`BoundSet`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Provenance {
    BoundedConcentration,
    RefinedConcentration,
    Hoeffding,
    Bernstein,
    RectangularBernstein,
    CombinatorialBernstein,
    BoundedDifferences,
}

impl Provenance {
    pub fn name(self) -> &'static str {
        match self {
            Provenance::BoundedConcentration => "bounded_concentration",
            Provenance::RefinedConcentration => "refined_concentration",
            Provenance::Hoeffding => "hoeffding",
            Provenance::Bernstein => "bernstein",
            Provenance::RectangularBernstein => "rectangular_bernstein",
            Provenance::CombinatorialBernstein => "combinatorial_bernstein",
            Provenance::BoundedDifferences => "bounded_differences",
        }
    }
}

impl fmt::Display for Provenance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Shape of a tail bound, without the dimensional factor `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailLaw {
    /// Degenerate law of the zero matrix: `d` at `t = 0`, zero beyond.
    Vanishing,
    /// `d · exp(−t² / (a + b t))`.
    Quadratic { a: f64, b: f64 },
    /// The smaller of `d · exp(−t/c + (v/c²) log(1 + ct/v))` and
    /// `d · exp(−t² / (2v + 2ct))`, for `c > 0`.
    Poisson { c: f64, v: f64 },
}

impl TailLaw {
    /// Unclamped value of `d · (law)(t)`.
    pub fn eval(&self, d: usize, t: f64) -> f64 {
        let d = d as f64;
        if t == 0.0 {
            return d;
        }
        match *self {
            TailLaw::Vanishing => 0.0,
            TailLaw::Quadratic { a, b } => d * math::exp(-t * t / (a + b * t)),
            TailLaw::Poisson { c, v } => {
                let poisson = d * math::exp(-t / c + (v / (c * c)) * math::ln_1p(c * t / v));
                let sub_gamma = d * math::exp(-t * t / (2.0 * v + 2.0 * c * t));
                poisson.min(sub_gamma)
            }
        }
    }
}

/// Tail and mean bounds for `λ_max` (and optionally `λ_min`) of a random
/// Hermitian matrix of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSet {
    pub provenance: Provenance,
    pub dim: usize,
    pub upper: TailLaw,
    /// Law for `P(λ_min ≤ −t)`.
    pub lower: Option<TailLaw>,
    pub mean_upper: f64,
    pub mean_lower: Option<f64>,
}

impl BoundSet {
    /// Bound on `P(λ_max ≥ t)`, clamped to `[0, 1]`.
    pub fn tail_upper(&self, t: f64) -> Result<f64, BoundError> {
        Ok(clamp_probability(self.tail_upper_raw(t)?))
    }

    pub fn tail_upper_raw(&self, t: f64) -> Result<f64, BoundError> {
        check_threshold(t)?;
        Ok(self.upper.eval(self.dim, t))
    }

    /// Bound on `P(λ_min ≤ −t)`, clamped, when the result provides one.
    pub fn tail_lower(&self, t: f64) -> Result<Option<f64>, BoundError> {
        check_threshold(t)?;
        Ok(self.lower.map(|law| clamp_probability(law.eval(self.dim, t))))
    }

    /// `(t, tail_upper(t))` over a grid.
    pub fn tabulate(&self, grid: &[f64]) -> Result<Vec<(f64, f64)>, BoundError> {
        grid.iter().map(|&t| Ok((t, self.tail_upper(t)?))).collect()
    }
}

fn check_threshold(t: f64) -> Result<(), BoundError> {
    if t >= 0.0 {
        Ok(())
    } else {
        Err(BoundError::NegativeThreshold(t))
    }
}

fn clamp_probability(p: f64) -> f64 {
    p.clamp(0.0, 1.0)
}

fn log_dim(d: usize) -> f64 {
    math::ln(d as f64)
}
