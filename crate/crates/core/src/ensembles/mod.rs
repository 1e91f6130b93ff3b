//! Random Hermitian matrix models over finite state spaces.
//!
//! Every family has a seeded sampler and, when the state space is small
//! enough, an exact enumerator producing an [`OutcomeTable`].
//!
//! Sampling draw order is fixed: coordinates are drawn in ascending order
//! (a mixture index, if any, comes first), and permutations are produced by
//! Fisher–Yates running from the last position down.

mod table;

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::linalg::{hermitian_dilation, spectral_norm, GeneralMatrix, HermitianMatrix};
use crate::rng::CounterRng;

pub use table::{Outcome, OutcomeTable};

/// Default enumeration limit for sign and atom families.
pub const SIGN_STATE_LIMIT: u128 = 1 << 16;
/// Default enumeration limit for permutation families (`8!`).
pub const PERMUTATION_STATE_LIMIT: u128 = 40_320;

const WEIGHT_TOL: f64 = 1e-12;
const CENTERING_TOL: f64 = 1e-12;
const ZERO_TOTAL_TOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnsembleError {
    /// `path` is a JSON pointer into the spec document.
    #[error("invalid spec at {path}: {reason}")]
    Invalid { path: String, reason: String },
    #[error("state space has {size} states, above the enumeration limit {limit}")]
    TooLarge { size: u128, limit: u128 },
    #[error("state does not belong to this ensemble: {0}")]
    StateMismatch(String),
}

fn invalid(path: String, reason: impl Into<String>) -> EnsembleError {
    EnsembleError::Invalid { path, reason: reason.into() }
}

/// One atom of a finite distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedMatrix {
    pub weight: f64,
    pub matrix: HermitianMatrix,
}

/// One joint draw of the random coefficients of a modulated series.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientDraw {
    pub weight: f64,
    pub matrices: Vec<HermitianMatrix>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    IndependentSum,
    RademacherSeries,
    RademacherModulated,
    CombinatorialSum,
    SamplingWithoutReplacement,
    PermutedInnerProduct,
    RademacherChaos,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::IndependentSum => "independent_sum",
            Family::RademacherSeries => "rademacher_series",
            Family::RademacherModulated => "rademacher_modulated",
            Family::CombinatorialSum => "combinatorial_sum",
            Family::SamplingWithoutReplacement => "sampling_without_replacement",
            Family::PermutedInnerProduct => "permuted_inner_product",
            Family::RademacherChaos => "rademacher_chaos",
        }
    }

    pub fn is_permutation(self) -> bool {
        matches!(
            self,
            Family::CombinatorialSum | Family::SamplingWithoutReplacement | Family::PermutedInnerProduct
        )
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Description of a random-matrix model.
#[derive(Debug, Clone, PartialEq)]
pub enum EnsembleSpec {
    /// `X = Σ_k Y_k` with independent, centred `Y_k` on finite supports.
    IndependentSum { supports: Vec<Vec<WeightedMatrix>> },
    /// `X = Σ_k ε_k A_k`.
    RademacherSeries { coefficients: Vec<HermitianMatrix> },
    /// `X = Σ_k ε_k W_k` where `(W_1, …, W_n)` is one of finitely many joint
    /// draws, independent of the signs.
    RademacherModulated { draws: Vec<CoefficientDraw> },
    /// `X = Σ_j A_{jπ(j)}` for a uniform permutation `π`; the array must sum
    /// to zero.
    CombinatorialSum { array: Vec<Vec<HermitianMatrix>> },
    /// Sum of `samples` of the `matrices` drawn without replacement, centred.
    SamplingWithoutReplacement { matrices: Vec<HermitianMatrix>, samples: usize },
    /// Dilation of `Σ_j B_j C_{π(j)}`, centred.
    PermutedInnerProduct { left: Vec<GeneralMatrix>, right: Vec<GeneralMatrix> },
    /// `H = Σ_{j<k} ε_j ε_k A_jk` with a symmetric array and zero diagonal.
    RademacherChaos { array: Vec<Vec<HermitianMatrix>> },
}

impl EnsembleSpec {
    pub fn family(&self) -> Family {
        match self {
            EnsembleSpec::IndependentSum { .. } => Family::IndependentSum,
            EnsembleSpec::RademacherSeries { .. } => Family::RademacherSeries,
            EnsembleSpec::RademacherModulated { .. } => Family::RademacherModulated,
            EnsembleSpec::CombinatorialSum { .. } => Family::CombinatorialSum,
            EnsembleSpec::SamplingWithoutReplacement { .. } => Family::SamplingWithoutReplacement,
            EnsembleSpec::PermutedInnerProduct { .. } => Family::PermutedInnerProduct,
            EnsembleSpec::RademacherChaos { .. } => Family::RademacherChaos,
        }
    }
}

/// A point of an ensemble's state space.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum State {
    /// Atom index chosen for each summand.
    Atoms(Vec<usize>),
    Signs(Vec<i8>),
    Modulated { draw: usize, signs: Vec<i8> },
    /// `π[j]` is the image of `j`.
    Permutation(Vec<usize>),
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Atoms(a) => write!(f, "atoms{a:?}"),
            State::Signs(s) => write!(f, "signs{s:?}"),
            State::Modulated { draw, signs } => write!(f, "draw {draw}, signs{signs:?}"),
            State::Permutation(p) => write!(f, "permutation{p:?}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Kind {
    Independent { supports: Vec<Vec<WeightedMatrix>>, second_moments: Vec<HermitianMatrix> },
    Series { coefficients: Vec<HermitianMatrix> },
    Modulated { draws: Vec<CoefficientDraw> },
    /// Centred array: entries sum to zero.
    Permutation { array: Vec<Vec<HermitianMatrix>> },
    Chaos { array: Vec<Vec<HermitianMatrix>> },
}

/// A validated ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    spec: EnsembleSpec,
    dim: usize,
    n: usize,
    pub(crate) kind: Kind,
}

impl Ensemble {
    pub fn new(spec: EnsembleSpec) -> Result<Self, EnsembleError> {
        Self::build(spec, true)
    }

    /// Like [`Ensemble::new`] but accepts independent summands whose supports
    /// are not centred. Such a model is not a valid Stein pair; this exists
    /// so that the Stein residual check can be exercised on a known fault.
    pub fn with_relaxed_centering(spec: EnsembleSpec) -> Result<Self, EnsembleError> {
        Self::build(spec, false)
    }

    fn build(spec: EnsembleSpec, require_centering: bool) -> Result<Self, EnsembleError> {
        let (dim, n, kind) = match &spec {
            EnsembleSpec::IndependentSum { supports } => validate_independent(supports, require_centering)?,
            EnsembleSpec::RademacherSeries { coefficients } => {
                nonempty(coefficients.len(), "/coefficients")?;
                let dim = common_dim(coefficients.iter().enumerate().map(|(k, m)| (format!("/coefficients/{k}"), m)))?;
                (dim, coefficients.len(), Kind::Series { coefficients: coefficients.clone() })
            }
            EnsembleSpec::RademacherModulated { draws } => validate_modulated(draws)?,
            EnsembleSpec::CombinatorialSum { array } => {
                let (dim, n) = square_array(array, "/array")?;
                let total = HermitianMatrix::sum(dim, array.iter().flatten());
                if total.max_abs() > ZERO_TOTAL_TOL {
                    return Err(invalid(
                        "/array".into(),
                        format!("entries must sum to zero (largest entry of the total is {:e})", total.max_abs()),
                    ));
                }
                (dim, n, Kind::Permutation { array: centred(array, dim) })
            }
            EnsembleSpec::SamplingWithoutReplacement { matrices, samples } => {
                let n = matrices.len();
                if n < 2 {
                    return Err(invalid("/matrices".into(), "need at least 2 matrices"));
                }
                let dim = common_dim(matrices.iter().enumerate().map(|(i, m)| (format!("/matrices/{i}"), m)))?;
                if *samples == 0 || *samples > n {
                    return Err(invalid("/samples".into(), format!("must lie in 1..={n}")));
                }
                let zero = HermitianMatrix::zeros(dim);
                let array: Vec<Vec<HermitianMatrix>> = (0..n)
                    .map(|j| if j < *samples { matrices.clone() } else { vec![zero.clone(); n] })
                    .collect();
                (dim, n, Kind::Permutation { array: centred(&array, dim) })
            }
            EnsembleSpec::PermutedInnerProduct { left, right } => validate_inner_product(left, right)?,
            EnsembleSpec::RademacherChaos { array } => {
                let (dim, n) = square_array(array, "/array")?;
                for j in 0..n {
                    if !array[j][j].is_zero(0.0) {
                        return Err(invalid(format!("/array/{j}/{j}"), "diagonal entries must be zero"));
                    }
                    for k in (j + 1)..n {
                        if array[j][k].max_abs_diff(&array[k][j]) > SYMMETRY_TOL {
                            return Err(invalid(format!("/array/{k}/{j}"), format!("must equal /array/{j}/{k}")));
                        }
                    }
                }
                (dim, n, Kind::Chaos { array: array.clone() })
            }
        };
        Ok(Self { spec, dim, n, kind })
    }

    pub fn spec(&self) -> &EnsembleSpec {
        &self.spec
    }

    pub fn family(&self) -> Family {
        self.spec.family()
    }

    /// Matrix dimension of `X`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of coordinates of the state (summands, signs, or permutation
    /// length).
    pub fn coordinates(&self) -> usize {
        self.n
    }

    /// The centred array `A_jk` behind a permutation family.
    pub fn permutation_array(&self) -> Option<&[Vec<HermitianMatrix>]> {
        match &self.kind {
            Kind::Permutation { array } => Some(array),
            _ => None,
        }
    }

    /// The chaos array `A_jk`.
    pub fn chaos_array(&self) -> Option<&[Vec<HermitianMatrix>]> {
        match &self.kind {
            Kind::Chaos { array } => Some(array),
            _ => None,
        }
    }

    /// Finite supports of an independent sum, with a Rademacher series viewed
    /// as the sum of the `±A_k`.
    pub fn independent_supports(&self) -> Option<Vec<Vec<WeightedMatrix>>> {
        match &self.kind {
            Kind::Independent { supports, .. } => Some(supports.clone()),
            Kind::Series { coefficients } => Some(
                coefficients
                    .iter()
                    .map(|a| {
                        vec![
                            WeightedMatrix { weight: 0.5, matrix: a.clone() },
                            WeightedMatrix { weight: 0.5, matrix: -a },
                        ]
                    })
                    .collect(),
            ),
            _ => None,
        }
    }

    /// `E Y_k²` for each summand of an independent sum or series.
    pub fn summand_second_moments(&self) -> Option<Vec<HermitianMatrix>> {
        match &self.kind {
            Kind::Independent { second_moments, .. } => Some(second_moments.clone()),
            Kind::Series { coefficients } => Some(coefficients.iter().map(HermitianMatrix::square).collect()),
            _ => None,
        }
    }

    /// `max ‖Y_k‖` over the support of each summand.
    pub fn summand_norm_bounds(&self) -> Option<Vec<f64>> {
        let supports = self.independent_supports()?;
        Some(
            supports
                .iter()
                .map(|s| s.iter().map(|a| spectral_norm(&a.matrix).unwrap_or(f64::INFINITY)).fold(0.0, f64::max))
                .collect(),
        )
    }

    /// Joint coefficient draws of a modulated series.
    pub fn coefficient_draws(&self) -> Option<&[CoefficientDraw]> {
        match &self.kind {
            Kind::Modulated { draws } => Some(draws),
            _ => None,
        }
    }

    /// Number of states, saturating at `u128::MAX`.
    pub fn state_space_size(&self) -> u128 {
        match &self.kind {
            Kind::Independent { supports, .. } => {
                supports.iter().fold(1u128, |acc, s| acc.saturating_mul(s.len() as u128))
            }
            Kind::Series { .. } | Kind::Chaos { .. } => pow2(self.n),
            Kind::Modulated { draws } => pow2(self.n).saturating_mul(draws.len() as u128),
            Kind::Permutation { .. } => (1..=self.n as u128).fold(1u128, |acc, k| acc.saturating_mul(k)),
        }
    }

    pub fn default_enumeration_limit(&self) -> u128 {
        if self.family().is_permutation() {
            PERMUTATION_STATE_LIMIT
        } else {
            SIGN_STATE_LIMIT
        }
    }

    pub fn is_enumerable(&self) -> bool {
        self.state_space_size() <= self.default_enumeration_limit()
    }

    pub fn sample_state(&self, rng: &mut CounterRng) -> State {
        match &self.kind {
            Kind::Independent { supports, .. } => {
                State::Atoms(supports.iter().map(|s| rng.weighted(&weights_of(s))).collect())
            }
            Kind::Series { .. } | Kind::Chaos { .. } => State::Signs((0..self.n).map(|_| rng.sign()).collect()),
            Kind::Modulated { draws } => {
                let w: Vec<f64> = draws.iter().map(|d| d.weight).collect();
                let draw = rng.weighted(&w);
                State::Modulated { draw, signs: (0..self.n).map(|_| rng.sign()).collect() }
            }
            Kind::Permutation { .. } => {
                let mut pi: Vec<usize> = (0..self.n).collect();
                for i in (1..self.n).rev() {
                    let j = rng.index(i + 1);
                    pi.swap(i, j);
                }
                State::Permutation(pi)
            }
        }
    }

    pub fn sample(&self, rng: &mut CounterRng) -> (State, HermitianMatrix) {
        let state = self.sample_state(rng);
        let x = self.evaluate_unchecked(&state);
        (state, x)
    }

    /// Probability of a single state.
    pub fn state_weight(&self, state: &State) -> Result<f64, EnsembleError> {
        self.check_state(state)?;
        Ok(match (&self.kind, state) {
            (Kind::Independent { supports, .. }, State::Atoms(atoms)) => {
                supports.iter().zip(atoms).map(|(s, &a)| s[a].weight).product()
            }
            (Kind::Modulated { draws }, State::Modulated { draw, .. }) => draws[*draw].weight / pow2(self.n) as f64,
            (Kind::Series { .. } | Kind::Chaos { .. }, _) => 1.0 / pow2(self.n) as f64,
            (Kind::Permutation { .. }, _) => 1.0 / self.state_space_size() as f64,
            _ => unreachable!("check_state accepted a mismatched state"),
        })
    }

    /// `X` at a state.
    pub fn evaluate(&self, state: &State) -> Result<HermitianMatrix, EnsembleError> {
        self.check_state(state)?;
        Ok(self.evaluate_unchecked(state))
    }

    pub(crate) fn evaluate_unchecked(&self, state: &State) -> HermitianMatrix {
        let d = self.dim;
        match (&self.kind, state) {
            (Kind::Independent { supports, .. }, State::Atoms(atoms)) => {
                HermitianMatrix::sum(d, supports.iter().zip(atoms).map(|(s, &a)| &s[a].matrix))
            }
            (Kind::Series { coefficients }, State::Signs(signs)) => signed_sum(d, coefficients, signs),
            (Kind::Modulated { draws }, State::Modulated { draw, signs }) => {
                signed_sum(d, &draws[*draw].matrices, signs)
            }
            (Kind::Permutation { array }, State::Permutation(pi)) => {
                HermitianMatrix::sum(d, pi.iter().enumerate().map(|(j, &k)| &array[j][k]))
            }
            (Kind::Chaos { array }, State::Signs(signs)) => {
                let mut acc = HermitianMatrix::zeros(d);
                for k in 0..self.n {
                    for j in 0..k {
                        if signs[j] * signs[k] > 0 {
                            acc = &acc + &array[j][k];
                        } else {
                            acc = &acc - &array[j][k];
                        }
                    }
                }
                acc
            }
            _ => unreachable!("state kind does not match the ensemble"),
        }
    }

    pub(crate) fn check_state(&self, state: &State) -> Result<(), EnsembleError> {
        let n = self.n;
        let ok = match (&self.kind, state) {
            (Kind::Independent { supports, .. }, State::Atoms(atoms)) => {
                atoms.len() == n && atoms.iter().zip(supports).all(|(&a, s)| a < s.len())
            }
            (Kind::Series { .. } | Kind::Chaos { .. }, State::Signs(signs)) => valid_signs(signs, n),
            (Kind::Modulated { draws }, State::Modulated { draw, signs }) => {
                *draw < draws.len() && valid_signs(signs, n)
            }
            (Kind::Permutation { .. }, State::Permutation(pi)) => {
                let mut seen = vec![false; n];
                pi.len() == n && pi.iter().all(|&k| k < n && !core::mem::replace(&mut seen[k], true))
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(EnsembleError::StateMismatch(format!("{state} for a {} ensemble with {n} coordinates", self.family())))
        }
    }

    /// All states with their probabilities, in a fixed order.
    pub fn states(&self, limit: u128) -> Result<Vec<(State, f64)>, EnsembleError> {
        let size = self.state_space_size();
        if size > limit {
            return Err(EnsembleError::TooLarge { size, limit });
        }
        let n = self.n;
        let out = match &self.kind {
            Kind::Independent { supports, .. } => {
                let mut out = Vec::with_capacity(size as usize);
                let mut atoms = vec![0usize; n];
                loop {
                    let w = supports.iter().zip(&atoms).map(|(s, &a)| s[a].weight).product();
                    out.push((State::Atoms(atoms.clone()), w));
                    // Odometer with the last coordinate running fastest.
                    let mut k = n;
                    loop {
                        if k == 0 {
                            return Ok(out);
                        }
                        k -= 1;
                        atoms[k] += 1;
                        if atoms[k] < supports[k].len() {
                            break;
                        }
                        atoms[k] = 0;
                    }
                }
            }
            Kind::Series { .. } | Kind::Chaos { .. } => {
                let w = 1.0 / size as f64;
                all_signs(n).into_iter().map(|s| (State::Signs(s), w)).collect()
            }
            Kind::Modulated { draws } => {
                let signs = all_signs(n);
                let mut out = Vec::with_capacity(size as usize);
                for (i, d) in draws.iter().enumerate() {
                    let w = d.weight / signs.len() as f64;
                    for s in &signs {
                        out.push((State::Modulated { draw: i, signs: s.clone() }, w));
                    }
                }
                out
            }
            Kind::Permutation { .. } => {
                let w = 1.0 / size as f64;
                all_permutations(n).into_iter().map(|p| (State::Permutation(p), w)).collect()
            }
        };
        Ok(out)
    }

    /// Exact outcome table, refusing state spaces larger than `limit`.
    pub fn enumerate(&self, limit: u128) -> Result<OutcomeTable, EnsembleError> {
        let states = self.states(limit)?;
        Ok(OutcomeTable::from_outcomes(
            self.dim,
            states.into_iter().map(|(s, w)| {
                let x = self.evaluate_unchecked(&s);
                (s, x, w)
            }),
        ))
    }

    /// [`Ensemble::enumerate`] with the family's default limit.
    pub fn enumerate_default(&self) -> Result<OutcomeTable, EnsembleError> {
        self.enumerate(self.default_enumeration_limit())
    }
}

fn pow2(n: usize) -> u128 {
    if n >= 128 {
        u128::MAX
    } else {
        1u128 << n
    }
}

fn valid_signs(signs: &[i8], n: usize) -> bool {
    signs.len() == n && signs.iter().all(|&s| s == 1 || s == -1)
}

fn weights_of(support: &[WeightedMatrix]) -> Vec<f64> {
    support.iter().map(|a| a.weight).collect()
}

fn signed_sum(d: usize, coefficients: &[HermitianMatrix], signs: &[i8]) -> HermitianMatrix {
    let mut acc = HermitianMatrix::zeros(d);
    for (a, &s) in coefficients.iter().zip(signs) {
        acc = if s > 0 { &acc + a } else { &acc - a };
    }
    acc
}

/// Sign vectors in lexicographic order with `+1 < −1`, first coordinate
/// slowest.
fn all_signs(n: usize) -> Vec<Vec<i8>> {
    (0..(1usize << n))
        .map(|bits| (0..n).map(|k| if bits >> (n - 1 - k) & 1 == 0 { 1 } else { -1 }).collect())
        .collect()
}

/// Permutations of `0..n` in lexicographic order.
fn all_permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut p: Vec<usize> = (0..n).collect();
    loop {
        out.push(p.clone());
        let Some(i) = (1..n).rev().find(|&i| p[i - 1] < p[i]) else {
            return out;
        };
        let j = (i..n).rev().find(|&j| p[j] > p[i - 1]).unwrap_or(i);
        p.swap(i - 1, j);
        p[i..].reverse();
    }
}

fn nonempty(len: usize, path: &str) -> Result<(), EnsembleError> {
    if len == 0 {
        Err(invalid(path.into(), "must not be empty"))
    } else {
        Ok(())
    }
}

fn common_dim<'a, I: Iterator<Item = (String, &'a HermitianMatrix)>>(items: I) -> Result<usize, EnsembleError> {
    let mut dim = None;
    for (path, m) in items {
        match dim {
            None => dim = Some(m.dim()),
            Some(d) if d != m.dim() => {
                return Err(invalid(path, format!("dimension {} differs from {d}", m.dim())));
            }
            _ => {}
        }
    }
    dim.ok_or_else(|| invalid(String::new(), "no matrices"))
}

fn check_weights(weights: &[f64], path: &str, entry: &str) -> Result<(), EnsembleError> {
    for (i, &w) in weights.iter().enumerate() {
        if !(w > 0.0 && w.is_finite()) {
            return Err(invalid(format!("{path}/{i}/{entry}"), "weight must be positive and finite"));
        }
    }
    let total: f64 = weights.iter().sum();
    if (total - 1.0).abs() > WEIGHT_TOL {
        return Err(invalid(path.into(), format!("weights sum to {total}, not 1")));
    }
    Ok(())
}

fn validate_independent(
    supports: &[Vec<WeightedMatrix>],
    require_centering: bool,
) -> Result<(usize, usize, Kind), EnsembleError> {
    nonempty(supports.len(), "/supports")?;
    let dim = common_dim(
        supports
            .iter()
            .enumerate()
            .flat_map(|(k, s)| s.iter().enumerate().map(move |(a, m)| (format!("/supports/{k}/{a}/matrix"), &m.matrix))),
    )?;
    let mut second_moments = Vec::with_capacity(supports.len());
    for (k, s) in supports.iter().enumerate() {
        let path = format!("/supports/{k}");
        nonempty(s.len(), &path)?;
        check_weights(&weights_of(s), &path, "weight")?;
        let mean = HermitianMatrix::sum(dim, s.iter().map(|a| a.matrix.scale(a.weight)).collect::<Vec<_>>().iter());
        let scale = s.iter().map(|a| a.matrix.max_abs()).fold(1.0, f64::max);
        if require_centering && mean.max_abs() > CENTERING_TOL * scale {
            return Err(invalid(path, format!("support is not centred (mean entry up to {:e})", mean.max_abs())));
        }
        let squares: Vec<HermitianMatrix> = s.iter().map(|a| a.matrix.square().scale(a.weight)).collect();
        second_moments.push(HermitianMatrix::sum(dim, &squares));
    }
    Ok((dim, supports.len(), Kind::Independent { supports: supports.to_vec(), second_moments }))
}

fn validate_modulated(draws: &[CoefficientDraw]) -> Result<(usize, usize, Kind), EnsembleError> {
    nonempty(draws.len(), "/draws")?;
    let n = draws[0].matrices.len();
    nonempty(n, "/draws/0/matrices")?;
    for (i, d) in draws.iter().enumerate() {
        if d.matrices.len() != n {
            return Err(invalid(format!("/draws/{i}/matrices"), format!("expected {n} matrices, found {}", d.matrices.len())));
        }
    }
    let dim = common_dim(
        draws
            .iter()
            .enumerate()
            .flat_map(|(i, d)| d.matrices.iter().enumerate().map(move |(k, m)| (format!("/draws/{i}/matrices/{k}"), m))),
    )?;
    check_weights(&draws.iter().map(|d| d.weight).collect::<Vec<_>>(), "/draws", "weight")?;
    Ok((dim, n, Kind::Modulated { draws: draws.to_vec() }))
}

fn square_array(array: &[Vec<HermitianMatrix>], path: &str) -> Result<(usize, usize), EnsembleError> {
    let n = array.len();
    if n < 2 {
        return Err(invalid(path.into(), "array must be at least 2 x 2"));
    }
    for (j, row) in array.iter().enumerate() {
        if row.len() != n {
            return Err(invalid(format!("{path}/{j}"), format!("row has {} entries, expected {n}", row.len())));
        }
    }
    let dim = common_dim(
        array
            .iter()
            .enumerate()
            .flat_map(|(j, row)| row.iter().enumerate().map(move |(k, m)| (format!("{path}/{j}/{k}"), m))),
    )?;
    Ok((dim, n))
}

/// Subtract the average entry so that the array sums to zero. This shifts
/// `Σ_j A_{jπ(j)}` by its mean.
fn centred(array: &[Vec<HermitianMatrix>], dim: usize) -> Vec<Vec<HermitianMatrix>> {
    let n = array.len();
    let offset = HermitianMatrix::sum(dim, array.iter().flatten()).scale(1.0 / (n * n) as f64);
    array.iter().map(|row| row.iter().map(|m| m - &offset).collect()).collect()
}

fn validate_inner_product(left: &[GeneralMatrix], right: &[GeneralMatrix]) -> Result<(usize, usize, Kind), EnsembleError> {
    let n = left.len();
    if n < 2 {
        return Err(invalid("/left".into(), "need at least 2 factors"));
    }
    if right.len() != n {
        return Err(invalid("/right".into(), format!("expected {n} factors, found {}", right.len())));
    }
    let (d1, inner) = (left[0].rows(), left[0].cols());
    let d2 = right[0].cols();
    for (j, b) in left.iter().enumerate() {
        if (b.rows(), b.cols()) != (d1, inner) {
            return Err(invalid(format!("/left/{j}"), format!("expected shape {d1}x{inner}")));
        }
    }
    for (j, c) in right.iter().enumerate() {
        if (c.rows(), c.cols()) != (inner, d2) {
            return Err(invalid(format!("/right/{j}"), format!("expected shape {inner}x{d2}")));
        }
    }
    let array: Vec<Vec<HermitianMatrix>> =
        left.iter().map(|b| right.iter().map(|c| hermitian_dilation(&(b * c))).collect()).collect();
    let dim = d1 + d2;
    Ok((dim, n, Kind::Permutation { array: centred(&array, dim) }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_z() -> HermitianMatrix {
        HermitianMatrix::diag(&[1.0, -1.0])
    }

    #[test]
    fn permutations_are_lexicographic_and_complete() {
        let p = all_permutations(3);
        assert_eq!(p.len(), 6);
        assert_eq!(p[0], vec![0, 1, 2]);
        assert_eq!(p[5], vec![2, 1, 0]);
        assert_eq!(all_permutations(1), vec![vec![0]]);
    }

    #[test]
    fn series_of_one_coefficient_is_plus_or_minus() {
        let e = Ensemble::new(EnsembleSpec::RademacherSeries { coefficients: vec![pauli_z()] }).unwrap();
        let mut rng = CounterRng::new(1);
        for _ in 0..10 {
            let (_, x) = e.sample(&mut rng);
            assert!(x == pauli_z() || x == -&pauli_z());
        }
        let (s1, _) = e.sample(&mut CounterRng::new(9));
        let (s2, _) = e.sample(&mut CounterRng::new(9));
        assert_eq!(s1, s2);
    }

    #[test]
    fn sampling_full_population_is_zero() {
        let i = HermitianMatrix::identity(2);
        let spec = EnsembleSpec::SamplingWithoutReplacement { matrices: vec![i.clone(), -&i], samples: 2 };
        let e = Ensemble::new(spec).unwrap();
        for (_, w) in e.states(10).unwrap() {
            assert_eq!(w, 0.5);
        }
        assert!(e.enumerate_default().unwrap().entries().iter().all(|o| o.x.is_zero(1e-15)));
    }

    #[test]
    fn validation_paths() {
        let bad = EnsembleSpec::IndependentSum {
            supports: vec![vec![WeightedMatrix { weight: 1.0, matrix: HermitianMatrix::identity(1) }]],
        };
        match Ensemble::new(bad.clone()) {
            Err(EnsembleError::Invalid { path, .. }) => assert_eq!(path, "/supports/0"),
            other => panic!("{other:?}"),
        }
        assert!(Ensemble::with_relaxed_centering(bad).is_ok());
        let one = HermitianMatrix::identity(1);
        let chaos = EnsembleSpec::RademacherChaos {
            array: vec![vec![HermitianMatrix::zeros(1), one.clone()], vec![one.scale(2.0), HermitianMatrix::zeros(1)]],
        };
        match Ensemble::new(chaos) {
            Err(EnsembleError::Invalid { path, .. }) => assert_eq!(path, "/array/1/0"),
            other => panic!("{other:?}"),
        }
        let mixed = EnsembleSpec::RademacherSeries { coefficients: vec![one.clone(), HermitianMatrix::identity(2)] };
        match Ensemble::new(mixed) {
            Err(EnsembleError::Invalid { path, .. }) => assert_eq!(path, "/coefficients/1"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn enumeration_refuses_large_spaces() {
        let e = Ensemble::new(EnsembleSpec::RademacherSeries { coefficients: vec![pauli_z(); 17] }).unwrap();
        assert_eq!(e.enumerate_default(), Err(EnsembleError::TooLarge { size: 1 << 17, limit: 1 << 16 }));
    }

    #[test]
    fn mismatched_state_rejected() {
        let e = Ensemble::new(EnsembleSpec::RademacherSeries { coefficients: vec![pauli_z(); 2] }).unwrap();
        assert!(e.evaluate(&State::Signs(vec![1, 0])).is_err());
        assert!(e.evaluate(&State::Permutation(vec![0, 1])).is_err());
        assert!(e.evaluate(&State::Signs(vec![1, -1])).is_ok());
    }
}
