//! Matrix Stein pairs `(X, X′)` with `E[X − X′ | Z] = αX`.
//!
//! * Independent sums and Rademacher series: resample one uniformly chosen
//!   summand; `α = 1/n`.
//! * Modulated series: the state is `(draw, ε)`; only the chosen sign is
//!   resampled, with the coefficients held fixed; `α = 1/n`.
//! * Permutation families: compose `π` with a transposition `(J, K)` of two
//!   independent uniform indices; `α = 2/n`.
//! * Rademacher chaos: resample one sign; the chaos reproduces itself with
//!   `s = 2`, so `α = 2/n`.
//!
//! Every conditional expectation is a finite average over the transition
//! law returned by [`SteinPairModel::transitions`].

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use thiserror::Error;

use crate::ensembles::{Ensemble, EnsembleError, EnsembleSpec, Kind, State};
use crate::linalg::{spectral_norm, HermitianMatrix, LinalgError};
use crate::math;
use crate::rng::CounterRng;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SteinError {
    #[error(transparent)]
    Ensemble(#[from] EnsembleError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("psi must be positive and finite, got {0}")]
    InvalidPsi(f64),
    #[error("Monte Carlo estimate needs at least one sample")]
    NoSamples,
    #[error("{0} ensembles have no coordinate-resampling structure")]
    Unsupported(&'static str),
    #[error("self-reproducing property fails at state {state}: {detail}")]
    NotSelfReproducing { state: String, detail: String },
}

/// A draw `(Z, X, X′)` from the pair.
#[derive(Debug, Clone, PartialEq)]
pub struct PairSample {
    pub state: State,
    pub next_state: State,
    pub x: HermitianMatrix,
    pub x_prime: HermitianMatrix,
}

/// One atom of the exact joint law of `(X, X′)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairOutcome {
    pub state: State,
    pub next_state: State,
    pub x: HermitianMatrix,
    pub x_prime: HermitianMatrix,
    pub weight: f64,
}

/// How to take the expectation in [`SteinPairModel::r_psi`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expectation {
    Exact { limit: u128 },
    MonteCarlo { samples: u64, seed: u64 },
}

/// Outcome of [`self_repro_check`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SelfReproduction {
    Parameter(f64),
    /// `H − EH` vanishes identically, so every `s` works.
    Indeterminate,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SteinPairModel {
    ensemble: Ensemble,
    alpha: f64,
}

/// Stein pair for a spec, with the family's scale factor.
pub fn build_stein_pair(spec: EnsembleSpec) -> Result<SteinPairModel, SteinError> {
    Ok(SteinPairModel::new(Ensemble::new(spec)?))
}

impl SteinPairModel {
    pub fn new(ensemble: Ensemble) -> Self {
        let n = ensemble.coordinates() as f64;
        let alpha = match ensemble.kind {
            Kind::Independent { .. } | Kind::Series { .. } | Kind::Modulated { .. } => 1.0 / n,
            Kind::Permutation { .. } | Kind::Chaos { .. } => 2.0 / n,
        };
        Self { ensemble, alpha }
    }

    pub fn ensemble(&self) -> &Ensemble {
        &self.ensemble
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.ensemble.dim()
    }

    /// Exact conditional law of `Z′` given `Z = state`. Entries may repeat a
    /// state; their weights then add.
    pub fn transitions(&self, state: &State) -> Result<Vec<(State, f64)>, SteinError> {
        self.ensemble.check_state(state)?;
        let n = self.ensemble.coordinates();
        let inv_n = 1.0 / n as f64;
        let mut out = Vec::new();
        match (&self.ensemble.kind, state) {
            (Kind::Independent { supports, .. }, State::Atoms(atoms)) => {
                for (k, support) in supports.iter().enumerate() {
                    for (a, atom) in support.iter().enumerate() {
                        let mut next = atoms.clone();
                        next[k] = a;
                        out.push((State::Atoms(next), inv_n * atom.weight));
                    }
                }
            }
            (Kind::Series { .. } | Kind::Chaos { .. }, State::Signs(signs)) => {
                for k in 0..n {
                    for s in [1i8, -1] {
                        let mut next = signs.clone();
                        next[k] = s;
                        out.push((State::Signs(next), 0.5 * inv_n));
                    }
                }
            }
            (Kind::Modulated { .. }, State::Modulated { draw, signs }) => {
                for k in 0..n {
                    for s in [1i8, -1] {
                        let mut next = signs.clone();
                        next[k] = s;
                        out.push((State::Modulated { draw: *draw, signs: next }, 0.5 * inv_n));
                    }
                }
            }
            (Kind::Permutation { .. }, State::Permutation(pi)) => {
                for j in 0..n {
                    for k in 0..n {
                        let mut next = pi.clone();
                        next.swap(j, k);
                        out.push((State::Permutation(next), inv_n * inv_n));
                    }
                }
            }
            _ => unreachable!("check_state accepted a mismatched state"),
        }
        Ok(out)
    }

    /// Draw `Z`, then `Z′` from the transition law.
    pub fn sample_pair(&self, rng: &mut CounterRng) -> PairSample {
        let state = self.ensemble.sample_state(rng);
        let n = self.ensemble.coordinates();
        let next_state = match (&self.ensemble.kind, &state) {
            (Kind::Independent { supports, .. }, State::Atoms(atoms)) => {
                let k = rng.index(n);
                let w: Vec<f64> = supports[k].iter().map(|a| a.weight).collect();
                let mut next = atoms.clone();
                next[k] = rng.weighted(&w);
                State::Atoms(next)
            }
            (Kind::Series { .. } | Kind::Chaos { .. }, State::Signs(signs)) => {
                let k = rng.index(n);
                let mut next = signs.clone();
                next[k] = rng.sign();
                State::Signs(next)
            }
            (Kind::Modulated { .. }, State::Modulated { draw, signs }) => {
                let k = rng.index(n);
                let mut next = signs.clone();
                next[k] = rng.sign();
                State::Modulated { draw: *draw, signs: next }
            }
            (Kind::Permutation { .. }, State::Permutation(pi)) => {
                let j = rng.index(n);
                let k = rng.index(n);
                let mut next = pi.clone();
                next.swap(j, k);
                State::Permutation(next)
            }
            _ => unreachable!("sampler produced a mismatched state"),
        };
        let x = self.ensemble.evaluate_unchecked(&state);
        let x_prime = self.ensemble.evaluate_unchecked(&next_state);
        PairSample { state, next_state, x, x_prime }
    }

    /// `Δ_X(Z)` from the family's closed form.
    pub fn conditional_variance(&self, state: &State) -> Result<HermitianMatrix, SteinError> {
        self.ensemble.check_state(state)?;
        let d = self.dim();
        let n = self.ensemble.coordinates();
        Ok(match (&self.ensemble.kind, state) {
            (Kind::Independent { supports, second_moments }, State::Atoms(atoms)) => {
                let terms: Vec<HermitianMatrix> =
                    supports.iter().zip(atoms).zip(second_moments).map(|((s, &a), m)| &s[a].matrix.square() + m).collect();
                HermitianMatrix::sum(d, &terms).scale(0.5)
            }
            (Kind::Series { coefficients }, _) => {
                HermitianMatrix::sum(d, &coefficients.iter().map(HermitianMatrix::square).collect::<Vec<_>>())
            }
            (Kind::Modulated { draws }, State::Modulated { draw, .. }) => HermitianMatrix::sum(
                d,
                &draws[*draw].matrices.iter().map(HermitianMatrix::square).collect::<Vec<_>>(),
            ),
            (Kind::Permutation { array }, State::Permutation(pi)) => {
                let mut terms = Vec::with_capacity(n * n);
                for j in 0..n {
                    for k in 0..n {
                        if j == k {
                            continue;
                        }
                        let diff = &(&(&array[j][pi[j]] + &array[k][pi[k]]) - &array[j][pi[k]]) - &array[k][pi[j]];
                        terms.push(diff.square());
                    }
                }
                HermitianMatrix::sum(d, &terms).scale(1.0 / (4.0 * n as f64))
            }
            (Kind::Chaos { array }, State::Signs(signs)) => {
                // (1/2s) Σ_k E(ε_k − ε_k′)² (Σ_{j≠k} ε_j A_jk)² with s = 2 and
                // E(ε − ε′)² = 2.
                let mut terms = Vec::with_capacity(n);
                for k in 0..n {
                    let mut g = HermitianMatrix::zeros(d);
                    for j in (0..n).filter(|&j| j != k) {
                        g = if signs[j] > 0 { &g + &array[j][k] } else { &g - &array[j][k] };
                    }
                    terms.push(g.square());
                }
                HermitianMatrix::sum(d, &terms).scale(0.5)
            }
            _ => unreachable!("check_state accepted a mismatched state"),
        })
    }

    /// `Δ_X(Z) = (1/2α) E[(X − X′)² | Z]` by direct averaging over the
    /// transition law. Independent of the closed forms.
    pub fn conditional_variance_by_transitions(&self, state: &State) -> Result<HermitianMatrix, SteinError> {
        let x = self.ensemble.evaluate(state)?;
        let terms: Vec<HermitianMatrix> = self
            .transitions(state)?
            .iter()
            .map(|(next, w)| (&x - &self.ensemble.evaluate_unchecked(next)).square().scale(*w))
            .collect();
        Ok(HermitianMatrix::sum(self.dim(), &terms).scale(1.0 / (2.0 * self.alpha)))
    }

    /// `E[X − X′ | Z]`.
    pub fn conditional_mean_shift(&self, state: &State) -> Result<HermitianMatrix, SteinError> {
        let x = self.ensemble.evaluate(state)?;
        let terms: Vec<HermitianMatrix> = self
            .transitions(state)?
            .iter()
            .map(|(next, w)| (&x - &self.ensemble.evaluate_unchecked(next)).scale(*w))
            .collect();
        Ok(HermitianMatrix::sum(self.dim(), &terms))
    }

    /// `‖E[X − X′ | Z] − αX‖`.
    pub fn stein_residual(&self, state: &State) -> Result<f64, SteinError> {
        let x = self.ensemble.evaluate(state)?;
        let shift = self.conditional_mean_shift(state)?;
        Ok(spectral_norm(&(&shift - &x.scale(self.alpha)))?)
    }

    /// Exact joint law of `(X, X′)`.
    pub fn enumerate_pairs(&self, limit: u128) -> Result<Vec<PairOutcome>, SteinError> {
        let mut out = Vec::new();
        for (state, w) in self.ensemble.states(limit)? {
            let x = self.ensemble.evaluate_unchecked(&state);
            for (next, tw) in self.transitions(&state)? {
                let x_prime = self.ensemble.evaluate_unchecked(&next);
                out.push(PairOutcome { state: state.clone(), next_state: next, x: x.clone(), x_prime, weight: w * tw });
            }
        }
        Ok(out)
    }

    /// `r(ψ) = (1/ψ) log E tr̄ e^{ψΔ_X}`, evaluated with a log-sum-exp over
    /// the spectra of `Δ_X`.
    pub fn r_psi(&self, psi: f64, mode: Expectation) -> Result<f64, SteinError> {
        if !(psi > 0.0 && psi.is_finite()) {
            return Err(SteinError::InvalidPsi(psi));
        }
        let d = self.dim() as f64;
        // (log-weight, ψλ) atoms of the mixture whose log-mean we need.
        let mut atoms: Vec<(f64, f64)> = Vec::new();
        let push_state = |state: &State, w: f64, atoms: &mut Vec<(f64, f64)>| -> Result<(), SteinError> {
            let delta = self.conditional_variance(state)?;
            let e = crate::linalg::eig_hermitian(&delta)?;
            for &l in e.eigenvalues() {
                atoms.push((math::ln(w / d), psi * l));
            }
            Ok(())
        };
        match mode {
            Expectation::Exact { limit } => {
                for (state, w) in self.ensemble.states(limit)? {
                    push_state(&state, w, &mut atoms)?;
                }
            }
            Expectation::MonteCarlo { samples, seed } => {
                if samples == 0 {
                    return Err(SteinError::NoSamples);
                }
                let mut rng = CounterRng::new(seed);
                let w = 1.0 / samples as f64;
                for _ in 0..samples {
                    let state = self.ensemble.sample_state(&mut rng);
                    push_state(&state, w, &mut atoms)?;
                }
            }
        }
        let top = atoms.iter().map(|a| a.0 + a.1).fold(f64::NEG_INFINITY, f64::max);
        let acc: f64 = atoms.iter().map(|a| math::exp(a.0 + a.1 - top)).sum();
        Ok((top + math::ln(acc)) / psi)
    }

    /// Deterministic `A_k²` with `E[(X − X^{(k)})² | Z] ⪯ A_k²` for every
    /// state, where `X^{(k)}` has coordinate `k` resampled. Not available for
    /// permutation families.
    pub fn difference_certificates(&self) -> Option<Vec<HermitianMatrix>> {
        let d = self.dim();
        match &self.ensemble.kind {
            // E[(Y − Y′)² | Y] = Y² + EY² ⪯ max‖y‖² I + EY².
            Kind::Independent { supports, second_moments } => Some(
                supports
                    .iter()
                    .zip(second_moments)
                    .map(|(s, m)| {
                        let r2 = s.iter().map(|a| norm(&a.matrix)).fold(0.0, f64::max);
                        &HermitianMatrix::scalar(d, r2 * r2) + m
                    })
                    .collect(),
            ),
            Kind::Series { coefficients } => Some(coefficients.iter().map(|a| a.square().scale(2.0)).collect()),
            Kind::Modulated { draws } => Some(
                (0..self.ensemble.coordinates())
                    .map(|k| {
                        let r = draws.iter().map(|dr| norm(&dr.matrices[k])).fold(0.0, f64::max);
                        HermitianMatrix::scalar(d, 2.0 * r * r)
                    })
                    .collect(),
            ),
            Kind::Chaos { array } => Some(
                (0..self.ensemble.coordinates())
                    .map(|k| {
                        let r: f64 = array.iter().enumerate().filter(|(j, _)| *j != k).map(|(_, row)| norm(&row[k])).sum();
                        HermitianMatrix::scalar(d, 2.0 * r * r)
                    })
                    .collect(),
            ),
            Kind::Permutation { .. } => None,
        }
    }
}

fn norm(m: &HermitianMatrix) -> f64 {
    spectral_norm(m).unwrap_or(f64::INFINITY)
}

/// Finds `s` with `Σ_k (H(z) − E[H(z with coordinate k resampled) | z]) =
/// s·(H(z) − EH)` for every state, by exhaustive enumeration.
pub fn self_repro_check(ensemble: &Ensemble, limit: u128) -> Result<SelfReproduction, SteinError> {
    if ensemble.family().is_permutation() {
        return Err(SteinError::Unsupported(ensemble.family().name()));
    }
    let model = SteinPairModel::new(ensemble.clone());
    let n = ensemble.coordinates() as f64;
    let table = ensemble.enumerate(limit)?;
    let mean = table.mean();
    let scale = table.entries().iter().map(|o| o.x.max_abs()).fold(1.0, f64::max);
    let tol = 1e-10 * scale * n;

    let mut cases = Vec::with_capacity(table.len());
    for o in table.entries() {
        // The transition law averages over k with weight 1/n, so n times the
        // conditional mean shift is the sum over coordinates.
        let lhs = model.conditional_mean_shift(&o.state)?.scale(n);
        let centred = &o.x - &mean;
        cases.push((o.state.clone(), lhs, centred));
    }
    let Some((_, lhs0, c0)) = cases.iter().max_by(|a, b| a.2.frobenius_norm().total_cmp(&b.2.frobenius_norm())) else {
        return Ok(SelfReproduction::Indeterminate);
    };
    if c0.max_abs() <= tol {
        for (state, lhs, _) in &cases {
            if lhs.max_abs() > tol {
                return Err(SteinError::NotSelfReproducing {
                    state: format!("{state}"),
                    detail: format!("H − EH vanishes but the coordinate sum has entry {:e}", lhs.max_abs()),
                });
            }
        }
        return Ok(SelfReproduction::Indeterminate);
    }
    let s = lhs0.frobenius_inner(c0) / c0.frobenius_inner(c0);
    for (state, lhs, centred) in &cases {
        let gap = (lhs - &centred.scale(s)).max_abs();
        if gap > tol {
            return Err(SteinError::NotSelfReproducing {
                state: format!("{state}"),
                detail: format!("best candidate s = {s} misses by {gap:e}"),
            });
        }
    }
    Ok(SelfReproduction::Parameter(s))
}

/// Aggregates a weighted list of `(key, weight)` pairs.
pub fn aggregate<K: Ord + Clone>(items: impl IntoIterator<Item = (K, f64)>) -> BTreeMap<K, f64> {
    let mut out = BTreeMap::new();
    for (k, w) in items {
        *out.entry(k).or_insert(0.0) += w;
    }
    out
}

/// Checks that the enumerated joint law of `(Z, Z′)` is symmetric: the total
/// weight of `(a, b)` equals that of `(b, a)` within `tol`. Returns the
/// first offending pair.
pub fn exchangeability_violation(pairs: &[PairOutcome], tol: f64) -> Option<(State, State, f64)> {
    let law = aggregate(pairs.iter().map(|p| ((p.state.clone(), p.next_state.clone()), p.weight)));
    for ((a, b), w) in &law {
        let back = law.get(&(b.clone(), a.clone())).copied().unwrap_or(0.0);
        if (w - back).abs() > tol {
            return Some((a.clone(), b.clone(), w - back));
        }
    }
    None
}
