//! Exact and Monte Carlo statistics of an ensemble, and the harness that
//! checks every applicable bound against them.

pub mod buchholz;
pub mod properties;
mod report;

use std::thread;

use mcx_core::linalg::eig_hermitian;
use mcx_core::{CounterRng, Ensemble, OutcomeTable};

use crate::format::{g12, Json};

pub use report::{
    verify_bounds, BoundEntry, BoundReport, EnsembleSummary, MeanCheck, MgfCheck, MomentCheck, ParameterCheck,
    TailCheck,
};

/// Samples per Monte Carlo chunk. Chunk `c` draws from
/// `CounterRng::for_stream(seed, c)`, so results do not depend on how chunks
/// are spread over workers.
pub const CHUNK_SIZE: u64 = 4096;

/// Normal quantile behind every reported half-width (99.7% two-sided).
pub const CONFIDENCE_Z: f64 = 3.0;

/// Slack multiplier on half-widths in verdicts: `bound ≥ p̂ − 3·half_width`.
pub const VERDICT_SLACK: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PsiChoice {
    Value(f64),
    /// `ψ = R⁻²`.
    InvR2,
    /// `ψ = (8R²)⁻¹`.
    Inv8R2,
}

impl PsiChoice {
    pub fn parse(s: &str) -> Result<Self, String> {
        match s {
            "inv_R2" | "inv_r2" => Ok(PsiChoice::InvR2),
            "inv_8R2" | "inv_8r2" => Ok(PsiChoice::Inv8R2),
            _ => match s.parse::<f64>() {
                Ok(v) if v > 0.0 && v.is_finite() => Ok(PsiChoice::Value(v)),
                _ => Err(format!("psi must be a positive number, inv_R2 or inv_8R2, got {s:?}")),
            },
        }
    }

    pub fn label(self) -> String {
        match self {
            PsiChoice::Value(v) => g12(v),
            PsiChoice::InvR2 => "inv_R2".into(),
            PsiChoice::Inv8R2 => "inv_8R2".into(),
        }
    }

    /// Resolves against a uniform bound `R`; `R = 0` falls back to `ψ = 1`.
    pub fn resolve(self, r: f64) -> f64 {
        match self {
            PsiChoice::Value(v) => v,
            _ if r <= 0.0 => 1.0,
            PsiChoice::InvR2 => 1.0 / (r * r),
            PsiChoice::Inv8R2 => 1.0 / (8.0 * r * r),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodChoice {
    /// Exact when the state space is within the default enumeration limit.
    Auto,
    Exact,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    MonteCarlo,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Exact => "exact",
            Method::MonteCarlo => "monte_carlo",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationConfig {
    pub samples: u64,
    pub seed: u64,
    pub t_grid: Vec<f64>,
    pub theta_grid: Vec<f64>,
    /// `None` picks the family default: `inv_8R2` for permutation families,
    /// `inv_R2` otherwise.
    pub psi: Option<PsiChoice>,
    pub workers: usize,
    pub method: MethodChoice,
    /// Moment orders for the BDG, Khintchine and Rosenthal comparisons.
    pub p_list: Vec<f64>,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            samples: 100_000,
            seed: 0,
            t_grid: (0..=10).map(f64::from).collect(),
            theta_grid: (-4..=4).map(|i| f64::from(i) * 0.25).collect(),
            psi: None,
            workers: 1,
            method: MethodChoice::Auto,
            p_list: vec![1.0, 1.5, 2.0],
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.samples == 0 {
            return Err("samples must be at least 1".into());
        }
        if self.workers == 0 {
            return Err("workers must be at least 1".into());
        }
        for (name, grid) in [("t grid", &self.t_grid), ("theta grid", &self.theta_grid)] {
            if grid.iter().any(|x| !x.is_finite()) {
                return Err(format!("{name} has a non-finite entry"));
            }
            if grid.windows(2).any(|w| w[0] > w[1]) {
                return Err(format!("{name} must be sorted ascending"));
            }
        }
        if self.t_grid.iter().any(|&t| t < 0.0) {
            return Err("t grid entries must be nonnegative".into());
        }
        if self.p_list.iter().any(|p| !(*p >= 1.0 && p.is_finite())) {
            return Err("moment orders must be finite and at least 1".into());
        }
        Ok(())
    }
}

/// Wilson score half-width for `hits` successes in `n` trials at normal
/// quantile `z`.
pub fn wilson_half_width(hits: u64, n: u64, z: f64) -> f64 {
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = z * z;
    z / (1.0 + z2 / n) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailPoint {
    pub t: f64,
    pub p_hat: f64,
    pub half_width: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TailCurve {
    pub method: Method,
    pub points: Vec<TailPoint>,
}

impl TailCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,p_hat,half_width,method\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{},{}\n", g12(p.t), g12(p.p_hat), g12(p.half_width), self.method.name()));
        }
        out
    }
}

/// Everything the harness needs from one pass over the ensemble.
#[derive(Debug, Clone, PartialEq)]
pub struct Statistics {
    pub method: Method,
    /// Number of states (exact) or samples (Monte Carlo).
    pub count: u64,
    pub tail: TailCurve,
    pub mean_lambda_max: f64,
    /// `3·sd/√N` for Monte Carlo, 0 for exact.
    pub mean_half_width: f64,
    /// `(θ, E tr̄ e^{θX}, half-width)`.
    pub trace_mgf: Vec<(f64, f64, f64)>,
    /// Present on the exact path only.
    pub table: Option<OutcomeTable>,
}

pub fn choose_method(ensemble: &Ensemble, choice: MethodChoice) -> Method {
    match choice {
        MethodChoice::Exact => Method::Exact,
        MethodChoice::MonteCarlo => Method::MonteCarlo,
        MethodChoice::Auto if ensemble.is_enumerable() => Method::Exact,
        MethodChoice::Auto => Method::MonteCarlo,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StatisticsError {
    TooLarge { size: u128, limit: u128 },
    Config(String),
}

impl std::fmt::Display for StatisticsError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StatisticsError::TooLarge { size, limit } => {
                write!(f, "exact enumeration refused: {size} states exceed the limit {limit}")
            }
            StatisticsError::Config(s) => f.write_str(s),
        }
    }
}

impl std::error::Error for StatisticsError {}

pub fn statistics(ensemble: &Ensemble, config: &SimulationConfig) -> Result<Statistics, StatisticsError> {
    config.validate().map_err(StatisticsError::Config)?;
    match choose_method(ensemble, config.method) {
        Method::Exact => {
            let limit = ensemble.default_enumeration_limit();
            let table = ensemble.enumerate(limit).map_err(|_| StatisticsError::TooLarge {
                size: ensemble.state_space_size(),
                limit,
            })?;
            Ok(exact_statistics(table, config))
        }
        Method::MonteCarlo => Ok(monte_carlo_statistics(ensemble, config)),
    }
}

fn exact_statistics(table: OutcomeTable, config: &SimulationConfig) -> Statistics {
    let points = config.t_grid.iter().map(|&t| TailPoint { t, p_hat: table.tail(t), half_width: 0.0 }).collect();
    Statistics {
        method: Method::Exact,
        count: table.len() as u64,
        tail: TailCurve { method: Method::Exact, points },
        mean_lambda_max: table.mean_lambda_max(),
        mean_half_width: 0.0,
        trace_mgf: config.theta_grid.iter().map(|&th| (th, table.trace_mgf(th), 0.0)).collect(),
        table: Some(table),
    }
}

#[derive(Debug, Clone)]
struct Accumulator {
    n: u64,
    tail_hits: Vec<u64>,
    sum_lmax: f64,
    sumsq_lmax: f64,
    mgf_sum: Vec<f64>,
    mgf_sumsq: Vec<f64>,
}

impl Accumulator {
    fn new(nt: usize, ntheta: usize) -> Self {
        Self {
            n: 0,
            tail_hits: vec![0; nt],
            sum_lmax: 0.0,
            sumsq_lmax: 0.0,
            mgf_sum: vec![0.0; ntheta],
            mgf_sumsq: vec![0.0; ntheta],
        }
    }

    fn merge(&mut self, other: &Accumulator) {
        self.n += other.n;
        for (a, b) in self.tail_hits.iter_mut().zip(&other.tail_hits) {
            *a += b;
        }
        self.sum_lmax += other.sum_lmax;
        self.sumsq_lmax += other.sumsq_lmax;
        for (a, b) in self.mgf_sum.iter_mut().zip(&other.mgf_sum) {
            *a += b;
        }
        for (a, b) in self.mgf_sumsq.iter_mut().zip(&other.mgf_sumsq) {
            *a += b;
        }
    }
}

/// Runs `work(chunk, count)` for every chunk of `samples` on `workers`
/// threads and returns the results in chunk order.
pub fn run_chunked<A, F>(samples: u64, workers: usize, work: F) -> Vec<A>
where
    A: Send,
    F: Fn(u64, u64) -> A + Sync,
{
    let chunks = samples.div_ceil(CHUNK_SIZE);
    let size = |c: u64| CHUNK_SIZE.min(samples - c * CHUNK_SIZE);
    let workers = (workers as u64).clamp(1, chunks.max(1));
    if workers == 1 {
        return (0..chunks).map(|c| work(c, size(c))).collect();
    }
    let work = &work;
    let mut tagged: Vec<(u64, A)> = thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                scope.spawn(move || {
                    (w..chunks).step_by(workers as usize).map(|c| (c, work(c, size(c)))).collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("worker panicked")).collect()
    });
    tagged.sort_by_key(|(c, _)| *c);
    tagged.into_iter().map(|(_, a)| a).collect()
}

fn monte_carlo_statistics(ensemble: &Ensemble, config: &SimulationConfig) -> Statistics {
    let d = ensemble.dim() as f64;
    let (nt, nth) = (config.t_grid.len(), config.theta_grid.len());
    let parts = run_chunked(config.samples, config.workers, |chunk, count| {
        let mut rng = CounterRng::for_stream(config.seed, chunk);
        let mut acc = Accumulator::new(nt, nth);
        for _ in 0..count {
            let (_, x) = ensemble.sample(&mut rng);
            let e = eig_hermitian(&x).expect("eigensolver failed on a finite matrix");
            let lmax = e.lambda_max();
            acc.n += 1;
            for (hit, &t) in acc.tail_hits.iter_mut().zip(&config.t_grid) {
                if lmax >= t {
                    *hit += 1;
                }
            }
            acc.sum_lmax += lmax;
            acc.sumsq_lmax += lmax * lmax;
            for (i, &th) in config.theta_grid.iter().enumerate() {
                let m = e.eigenvalues().iter().map(|&l| (th * l).exp()).sum::<f64>() / d;
                acc.mgf_sum[i] += m;
                acc.mgf_sumsq[i] += m * m;
            }
        }
        acc
    });
    let mut total = Accumulator::new(nt, nth);
    for p in &parts {
        total.merge(p);
    }
    let n = total.n as f64;
    let spread = |sum: f64, sumsq: f64| -> f64 {
        let mean = sum / n;
        let var = if total.n > 1 { ((sumsq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        CONFIDENCE_Z * (var / n).sqrt()
    };
    let points = config
        .t_grid
        .iter()
        .zip(&total.tail_hits)
        .map(|(&t, &hits)| TailPoint {
            t,
            p_hat: hits as f64 / n,
            half_width: wilson_half_width(hits, total.n, CONFIDENCE_Z),
        })
        .collect();
    Statistics {
        method: Method::MonteCarlo,
        count: total.n,
        tail: TailCurve { method: Method::MonteCarlo, points },
        mean_lambda_max: total.sum_lmax / n,
        mean_half_width: spread(total.sum_lmax, total.sumsq_lmax),
        trace_mgf: config
            .theta_grid
            .iter()
            .enumerate()
            .map(|(i, &th)| (th, total.mgf_sum[i] / n, spread(total.mgf_sum[i], total.mgf_sumsq[i])))
            .collect(),
        table: None,
    }
}

/// Tail curve `P(λ_max ≥ t)` over the configured grid.
pub fn simulate_tail(ensemble: &Ensemble, config: &SimulationConfig) -> Result<TailCurve, StatisticsError> {
    Ok(statistics(ensemble, config)?.tail)
}

/// `θ ↦ E tr̄ e^{θX}` over the configured grid.
pub fn empirical_trace_mgf(ensemble: &Ensemble, config: &SimulationConfig) -> Result<Vec<(f64, f64)>, StatisticsError> {
    Ok(statistics(ensemble, config)?.trace_mgf.into_iter().map(|(th, m, _)| (th, m)).collect())
}

pub(crate) fn tail_curve_json(curve: &TailCurve) -> Json {
    Json::Arr(
        curve
            .points
            .iter()
            .map(|p| Json::obj().num("t", p.t).num("p_hat", p.p_hat).num("half_width", p.half_width).build())
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use mcx_core::{EnsembleSpec, HermitianMatrix};

    fn rademacher(n: usize) -> Ensemble {
        Ensemble::new(EnsembleSpec::RademacherSeries { coefficients: vec![HermitianMatrix::diag(&[1.0, -1.0]); n] })
            .unwrap()
    }

    #[test]
    fn wilson_limits() {
        assert!(wilson_half_width(0, 100, 3.0) > 0.0);
        let hw = wilson_half_width(50, 10_000, 1.96);
        assert!((hw - 1.96 * (0.005f64 * 0.995 / 10_000.0).sqrt()).abs() < 1e-4);
    }

    #[test]
    fn exact_tail_of_rademacher_series() {
        let cfg = SimulationConfig { t_grid: vec![0.0, 5.0, 11.0], ..SimulationConfig::default() };
        let curve = simulate_tail(&rademacher(10), &cfg).unwrap();
        assert_eq!(curve.method, Method::Exact);
        assert_eq!(curve.points[0].p_hat, 1.0);
        assert_eq!(curve.points[1].p_hat, 0.109375);
        assert_eq!(curve.points[2].p_hat, 0.0);
        assert_eq!(curve.to_csv().lines().next(), Some("t,p_hat,half_width,method"));
    }

    #[test]
    fn chunking_is_worker_independent() {
        let base = SimulationConfig {
            samples: 3 * CHUNK_SIZE + 17,
            seed: 11,
            method: MethodChoice::MonteCarlo,
            ..SimulationConfig::default()
        };
        let e = rademacher(6);
        let one = statistics(&e, &base).unwrap();
        let many = statistics(&e, &SimulationConfig { workers: 3, ..base.clone() }).unwrap();
        assert_eq!(one, many);
        assert_eq!(one.count, base.samples);
    }

    #[test]
    fn trace_mgf_at_zero_is_one() {
        let cfg = SimulationConfig { theta_grid: vec![0.0, 1.0], ..SimulationConfig::default() };
        let m = empirical_trace_mgf(&rademacher(1), &cfg).unwrap();
        assert_eq!(m[0].1, 1.0);
        assert!((m[1].1.ln() - 1f64.cosh().ln()).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        let mut c = SimulationConfig::default();
        assert!(c.validate().is_ok());
        c.t_grid = vec![2.0, 1.0];
        assert!(c.validate().is_err());
        c.t_grid = vec![-1.0];
        assert!(c.validate().is_err());
    }
}
