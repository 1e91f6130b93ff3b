use mcx_core::bounds::{
    bdg_bound, bernstein, bounded_concentration, bounded_differences, combinatorial_bernstein, hoeffding, khintchine,
    mgf_bound_bounded, mgf_bound_refined, refined_concentration, rosenthal_hermitian, rosenthal_psd, MomentOrder,
};
use mcx_core::ensembles::{Family, WeightedMatrix};
use mcx_core::linalg::{eig_hermitian, schatten_norm, spectral_norm};
use mcx_core::stein::Expectation;
use mcx_core::{BoundSet, Ensemble, HermitianMatrix, OutcomeTable, Provenance, State, SteinPairModel, TailLaw};

use super::{statistics, tail_curve_json, Method, PsiChoice, SimulationConfig, Statistics, StatisticsError, VERDICT_SLACK};
use crate::format::Json;

/// Relative slack for moment comparisons that can hold with equality.
pub const MOMENT_EQUALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleSummary {
    pub family: Family,
    pub d: usize,
    pub n: usize,
    pub alpha: f64,
    /// Variance proxy of the family's Bernstein-type bound.
    pub sigma2: Option<f64>,
    /// Uniform bound `R` on the summands (the array entries for permutation
    /// families, `max_k Σ_j ‖A_jk‖` for chaos).
    pub r_bound: f64,
    pub psi_choice: PsiChoice,
    pub psi: f64,
    pub r_psi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailCheck {
    pub t: f64,
    pub bound: f64,
    pub statistic: f64,
    pub half_width: f64,
    /// `bound − statistic`.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanCheck {
    pub mean_upper: f64,
    pub statistic: f64,
    pub half_width: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundEntry {
    Checked {
        name: &'static str,
        params: Vec<(&'static str, f64)>,
        bounds: BoundSet,
        points: Vec<TailCheck>,
        mean: MeanCheck,
    },
    Skipped {
        name: &'static str,
        reason: String,
    },
}

impl BoundEntry {
    pub fn name(&self) -> &'static str {
        match self {
            BoundEntry::Checked { name, .. } | BoundEntry::Skipped { name, .. } => name,
        }
    }

    pub fn pass(&self) -> bool {
        match self {
            BoundEntry::Checked { points, mean, .. } => mean.pass && points.iter().all(|p| p.pass),
            BoundEntry::Skipped { .. } => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MomentCheck {
    Checked { name: &'static str, p: f64, statistic: f64, bound: f64, pass: bool },
    Skipped { name: &'static str, p: f64, reason: String },
}

impl MomentCheck {
    pub fn pass(&self) -> bool {
        match self {
            MomentCheck::Checked { pass, .. } => *pass,
            MomentCheck::Skipped { .. } => true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MgfCheck {
    pub theta: f64,
    pub trace_mgf: f64,
    pub half_width: f64,
    /// `(name, bound on log m(θ), pass)`; bounds outside their θ domain are
    /// left out.
    pub bounds: Vec<(&'static str, f64, bool)>,
}

/// A scalar inequality between bound parameters, such as `r(R⁻²) ≤ 1.5σ²`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterCheck {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub summary: EnsembleSummary,
    pub method: Method,
    /// States enumerated or samples drawn.
    pub count: u64,
    pub seed: Option<u64>,
    pub tail: super::TailCurve,
    pub bounds: Vec<BoundEntry>,
    pub moments: Vec<MomentCheck>,
    pub mgf: Vec<MgfCheck>,
    pub parameters: Vec<ParameterCheck>,
}

impl BoundReport {
    pub fn pass(&self) -> bool {
        self.bounds.iter().all(BoundEntry::pass)
            && self.moments.iter().all(MomentCheck::pass)
            && self.mgf.iter().all(|m| m.bounds.iter().all(|b| b.2))
            && self.parameters.iter().all(|p| p.pass)
    }

    pub fn bound(&self, name: &str) -> Option<&BoundEntry> {
        self.bounds.iter().find(|b| b.name() == name)
    }

    pub fn to_json(&self) -> Json {
        let s = &self.summary;
        let summary = Json::obj()
            .str("family", s.family.name())
            .int("d", s.d as i128)
            .int("n", s.n as i128)
            .num("alpha", s.alpha)
            .opt_num("sigma2", s.sigma2)
            .num("R", s.r_bound)
            .str("psi_choice", s.psi_choice.label())
            .num("psi", s.psi)
            .num("r_psi", s.r_psi)
            .build();
        let bounds = self
            .bounds
            .iter()
            .map(|b| match b {
                BoundEntry::Checked { name, params, bounds, points, mean } => {
                    let mut p = Json::obj();
                    for (k, v) in params {
                        p = p.num(k, *v);
                    }
                    Json::obj()
                        .str("name", *name)
                        .str("status", "checked")
                        .str("verdict", verdict(b.pass()))
                        .field("parameters", p.build())
                        .field("law", law_json(&bounds.upper))
                        .field(
                            "points",
                            Json::Arr(
                                points
                                    .iter()
                                    .map(|c| {
                                        Json::obj()
                                            .num("t", c.t)
                                            .num("bound", c.bound)
                                            .num("p_hat", c.statistic)
                                            .num("half_width", c.half_width)
                                            .num("margin", c.margin)
                                            .str("verdict", verdict(c.pass))
                                            .build()
                                    })
                                    .collect(),
                            ),
                        )
                        .field(
                            "mean",
                            Json::obj()
                                .num("mean_upper", mean.mean_upper)
                                .num("e_lambda_max", mean.statistic)
                                .num("half_width", mean.half_width)
                                .str("verdict", verdict(mean.pass))
                                .build(),
                        )
                        .build()
                }
                BoundEntry::Skipped { name, reason } => {
                    Json::obj().str("name", *name).str("status", "skipped").str("reason", reason.clone()).build()
                }
            })
            .collect();
        let moments = self
            .moments
            .iter()
            .map(|m| match m {
                MomentCheck::Checked { name, p, statistic, bound, pass } => Json::obj()
                    .str("name", *name)
                    .num("p", *p)
                    .str("status", "checked")
                    .num("statistic", *statistic)
                    .num("bound", *bound)
                    .str("verdict", verdict(*pass))
                    .build(),
                MomentCheck::Skipped { name, p, reason } => Json::obj()
                    .str("name", *name)
                    .num("p", *p)
                    .str("status", "skipped")
                    .str("reason", reason.clone())
                    .build(),
            })
            .collect();
        let mgf = self
            .mgf
            .iter()
            .map(|m| {
                let mut b = Json::obj();
                for (name, v, pass) in &m.bounds {
                    b = b.field(name, Json::obj().num("log_bound", *v).str("verdict", verdict(*pass)).build());
                }
                Json::obj()
                    .num("theta", m.theta)
                    .num("trace_mgf", m.trace_mgf)
                    .num("log_trace_mgf", m.trace_mgf.ln())
                    .num("half_width", m.half_width)
                    .field("bounds", b.build())
                    .build()
            })
            .collect();
        let parameters = self
            .parameters
            .iter()
            .map(|p| {
                Json::obj().str("name", p.name).num("value", p.value).num("limit", p.limit).str("verdict", verdict(p.pass)).build()
            })
            .collect();
        let mut out = Json::obj().field("summary", summary).str("method", self.method.name());
        out = match self.method {
            Method::Exact => out.int("states", self.count as i128),
            Method::MonteCarlo => out
                .int("samples", self.count as i128)
                .int("seed", self.seed.unwrap_or(0) as i128)
                .str("note", "Monte Carlo verdicts are statistical: bound >= p_hat - 3 * half_width"),
        };
        out.field("tail", tail_curve_json(&self.tail))
            .field("bounds", Json::Arr(bounds))
            .field("moments", Json::Arr(moments))
            .field("trace_mgf", Json::Arr(mgf))
            .field("parameter_checks", Json::Arr(parameters))
            .str("verdict", verdict(self.pass()))
            .build()
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn law_json(law: &TailLaw) -> Json {
    match *law {
        TailLaw::Vanishing => Json::obj().str("kind", "vanishing").build(),
        TailLaw::Quadratic { a, b } => Json::obj().str("kind", "quadratic").num("a", a).num("b", b).build(),
        TailLaw::Poisson { c, v } => Json::obj().str("kind", "poisson").num("c", c).num("v", v).build(),
    }
}

fn norm(m: &HermitianMatrix) -> f64 {
    spectral_norm(m).expect("eigensolver failed on a finite matrix")
}

/// Uniform bound `R` used by the ψ presets.
fn uniform_bound(ensemble: &Ensemble) -> f64 {
    if let Some(bounds) = ensemble.summand_norm_bounds() {
        return bounds.into_iter().fold(0.0, f64::max);
    }
    if let Some(draws) = ensemble.coefficient_draws() {
        return draws.iter().flat_map(|d| d.matrices.iter().map(norm)).fold(0.0, f64::max);
    }
    if let Some(array) = ensemble.permutation_array() {
        return array.iter().flatten().map(norm).fold(0.0, f64::max);
    }
    if let Some(array) = ensemble.chaos_array() {
        let n = array.len();
        return (0..n).map(|k| (0..n).filter(|&j| j != k).map(|j| norm(&array[j][k])).sum::<f64>()).fold(0.0, f64::max);
    }
    0.0
}

fn tail_checks(bounds: &BoundSet, stats: &Statistics) -> Vec<TailCheck> {
    stats
        .tail
        .points
        .iter()
        .map(|p| {
            let bound = bounds.tail_upper(p.t).expect("grid thresholds are nonnegative");
            TailCheck {
                t: p.t,
                bound,
                statistic: p.p_hat,
                half_width: p.half_width,
                margin: bound - p.p_hat,
                pass: bound >= p.p_hat - VERDICT_SLACK * p.half_width,
            }
        })
        .collect()
}

fn checked(name: &'static str, params: Vec<(&'static str, f64)>, bounds: BoundSet, stats: &Statistics) -> BoundEntry {
    let points = tail_checks(&bounds, stats);
    // An exact mean of ±λ values carries rounding on the scale of E|λ_max|.
    let rounding = stats.table.as_ref().map_or(0.0, |t| {
        MOMENT_EQUALITY_TOL * t.entries().iter().map(|o| o.weight * o.lambda_max().abs()).sum::<f64>()
    });
    let mean = MeanCheck {
        mean_upper: bounds.mean_upper,
        statistic: stats.mean_lambda_max,
        half_width: stats.mean_half_width,
        pass: bounds.mean_upper >= stats.mean_lambda_max - VERDICT_SLACK * stats.mean_half_width - rounding,
    };
    BoundEntry::Checked { name, params, bounds, points, mean }
}

fn skipped(name: &'static str, reason: impl Into<String>) -> BoundEntry {
    BoundEntry::Skipped { name, reason: reason.into() }
}

/// Computes every applicable bound for the ensemble and checks it against
/// exact or Monte Carlo statistics.
pub fn verify_bounds(ensemble: &Ensemble, config: &SimulationConfig) -> Result<BoundReport, StatisticsError> {
    let stats = statistics(ensemble, config)?;
    let model = SteinPairModel::new(ensemble.clone());
    let family = ensemble.family();
    let d = ensemble.dim();
    let n = ensemble.coordinates();
    let r_bound = uniform_bound(ensemble);
    let psi_choice = config.psi.unwrap_or(if family.is_permutation() { PsiChoice::Inv8R2 } else { PsiChoice::InvR2 });
    let psi = psi_choice.resolve(r_bound);
    let mode = match stats.method {
        Method::Exact => Expectation::Exact { limit: ensemble.default_enumeration_limit() },
        Method::MonteCarlo => Expectation::MonteCarlo { samples: config.samples, seed: config.seed },
    };
    let r_at = |psi: f64| model.r_psi(psi, mode).expect("r(psi) on a validated model");
    let r_psi = r_at(psi);

    let mut bounds = Vec::new();
    let mut parameters = Vec::new();
    let mut sigma2 = None;
    // `v` with `Δ_X ⪯ vI` almost surely, when one is known.
    let mut v_cert: Option<f64> = None;

    // Hoeffding and Bernstein need independent summands.
    match (ensemble.independent_supports(), ensemble.summand_second_moments()) {
        (Some(supports), Some(second)) => {
            let bounds_sq: Vec<HermitianMatrix> = if family == Family::RademacherSeries {
                second.clone()
            } else {
                supports
                    .iter()
                    .map(|s| {
                        let r = s.iter().map(|a| norm(&a.matrix)).fold(0.0, f64::max);
                        HermitianMatrix::scalar(d, r * r)
                    })
                    .collect()
            };
            let (h_sigma2, h) = hoeffding(&bounds_sq, &second).expect("psd inputs by construction");
            v_cert = Some(h_sigma2);
            bounds.push(checked("hoeffding", vec![("sigma2", h_sigma2)], h, &stats));
            let b_sigma2 = norm(&HermitianMatrix::sum(d, &second));
            sigma2 = Some(b_sigma2);
            let b = bernstein(b_sigma2, r_bound, d).expect("finite parameters");
            bounds.push(checked("bernstein", vec![("sigma2", b_sigma2), ("R", r_bound)], b, &stats));
            if r_bound > 0.0 {
                parameters.push(ParameterCheck {
                    name: "r(R^-2) <= 1.5 sigma2",
                    value: r_at(1.0 / (r_bound * r_bound)),
                    limit: 1.5 * b_sigma2,
                    pass: r_at(1.0 / (r_bound * r_bound)) <= 1.5 * b_sigma2 * (1.0 + MOMENT_EQUALITY_TOL),
                });
            }
        }
        _ => {
            bounds.push(skipped("hoeffding", "needs independent summands"));
            bounds.push(skipped("bernstein", "needs independent summands"));
        }
    }

    if let Some(draws) = ensemble.coefficient_draws() {
        // Δ_X = ΣW_k² for the realised coefficients.
        let v = draws
            .iter()
            .map(|dr| {
                let squares: Vec<HermitianMatrix> = dr.matrices.iter().map(HermitianMatrix::square).collect();
                norm(&HermitianMatrix::sum(d, &squares))
            })
            .fold(0.0, f64::max);
        v_cert = Some(v);
    }

    if let Some(array) = ensemble.permutation_array() {
        let summary = combinatorial_bernstein(array).expect("validated zero-total array");
        sigma2 = Some(summary.sigma2);
        bounds.push(checked(
            "combinatorial_bernstein",
            vec![("sigma2", summary.sigma2), ("R", summary.r)],
            summary.bounds,
            &stats,
        ));
        if summary.r > 0.0 {
            let value = r_at(1.0 / (8.0 * summary.r * summary.r));
            parameters.push(ParameterCheck {
                name: "r((8R^2)^-1) <= 6 sigma2",
                value,
                limit: 6.0 * summary.sigma2,
                pass: value <= 6.0 * summary.sigma2 * (1.0 + MOMENT_EQUALITY_TOL),
            });
        }
    } else {
        bounds.push(skipped("combinatorial_bernstein", "needs a permutation family"));
    }

    match model.difference_certificates() {
        Some(certs) => {
            let s = model.alpha() * n as f64;
            let l = norm(&HermitianMatrix::sum(d, &certs));
            if family == Family::RademacherChaos {
                v_cert = Some(l / (2.0 * s));
            }
            let b = bounded_differences(s, l, d).expect("finite parameters");
            bounds.push(checked("bounded_differences", vec![("s", s), ("L", l)], b, &stats));
        }
        None => bounds.push(skipped("bounded_differences", "permutation families have no coordinatewise resampling")),
    }

    // On finite state spaces the supremum of λ_max(Δ_X) is itself a valid v.
    if v_cert.is_none() {
        if let Some(table) = &stats.table {
            let v = table
                .entries()
                .iter()
                .map(|o| {
                    let delta = model.conditional_variance(&o.state).expect("enumerated state");
                    eig_hermitian(&delta).expect("finite matrix").lambda_max()
                })
                .fold(0.0, f64::max);
            v_cert = Some(v);
        }
    }
    match v_cert {
        Some(v) if v > 0.0 => {
            let b = bounded_concentration(0.0, v, d).expect("positive v");
            bounds.push(checked("bounded_concentration", vec![("c", 0.0), ("v", v)], b, &stats));
        }
        Some(_) => {
            // Δ_X = 0 forces X = 0.
            let b = BoundSet {
                provenance: Provenance::BoundedConcentration,
                dim: d,
                upper: TailLaw::Vanishing,
                lower: Some(TailLaw::Vanishing),
                mean_upper: 0.0,
                mean_lower: Some(0.0),
            };
            bounds.push(checked("bounded_concentration", vec![("c", 0.0), ("v", 0.0)], b, &stats));
        }
        None => bounds.push(skipped("bounded_concentration", "no almost-sure bound on the conditional variance without enumeration")),
    }

    let refined = refined_concentration(r_psi, psi, d).expect("finite r and psi");
    bounds.push(checked("refined", vec![("r_psi", r_psi), ("psi", psi)], refined, &stats));

    let mgf = stats
        .trace_mgf
        .iter()
        .map(|&(theta, m, hw)| {
            let log_m = m.ln();
            let slack = if hw > 0.0 { ((m + VERDICT_SLACK * hw) / m).ln() } else { 0.0 };
            let mut out = Vec::new();
            if let Some(v) = v_cert {
                if let Ok(b) = mgf_bound_bounded(0.0, v, theta) {
                    out.push(("bounded", b, b >= log_m - slack));
                }
            }
            if let Ok(b) = mgf_bound_refined(r_psi, psi, theta) {
                out.push(("refined", b, b >= log_m - slack));
            }
            MgfCheck { theta, trace_mgf: m, half_width: hw, bounds: out }
        })
        .collect();

    let moments = match &stats.table {
        Some(table) => moment_checks(ensemble, &model, table, &config.p_list),
        None => config
            .p_list
            .iter()
            .flat_map(|&p| {
                ["bdg", "khintchine", "rosenthal_psd", "rosenthal_hermitian"].map(|name| MomentCheck::Skipped {
                    name,
                    p,
                    reason: "moment comparisons need exact enumeration".into(),
                })
            })
            .collect(),
    };

    Ok(BoundReport {
        summary: EnsembleSummary { family, d, n, alpha: model.alpha(), sigma2, r_bound, psi_choice, psi, r_psi },
        method: stats.method,
        count: stats.count,
        seed: (stats.method == Method::MonteCarlo).then_some(config.seed),
        tail: stats.tail.clone(),
        bounds,
        moments,
        mgf,
        parameters,
    })
}

fn moment_pass(statistic: f64, bound: f64) -> bool {
    bound >= statistic * (1.0 - MOMENT_EQUALITY_TOL)
}

fn schatten_power(m: &HermitianMatrix, q: f64) -> f64 {
    let s = schatten_norm(m, q).expect("finite matrix");
    s.powf(q)
}

/// The atom of each summand realised in `state`, for independent families.
fn atoms_of<'a>(supports: &'a [Vec<WeightedMatrix>], state: &State) -> Vec<&'a HermitianMatrix> {
    match state {
        State::Atoms(idx) => supports.iter().zip(idx).map(|(s, &i)| &s[i].matrix).collect(),
        // A series is viewed as the sum of the atoms {+A_k, −A_k}.
        State::Signs(signs) => supports.iter().zip(signs).map(|(s, &e)| &s[if e > 0 { 0 } else { 1 }].matrix).collect(),
        _ => Vec::new(),
    }
}

fn moment_checks(ensemble: &Ensemble, model: &SteinPairModel, table: &OutcomeTable, p_list: &[f64]) -> Vec<MomentCheck> {
    let d = ensemble.dim();
    let deltas: Vec<HermitianMatrix> =
        table.entries().iter().map(|o| model.conditional_variance(&o.state).expect("enumerated state")).collect();
    let supports = ensemble.independent_supports();
    let second = ensemble.summand_second_moments();
    let mut out = Vec::new();
    for &p in p_list {
        let order = match MomentOrder::extended(p) {
            Ok(o) => o,
            Err(e) => {
                for name in ["bdg", "khintchine", "rosenthal_psd", "rosenthal_hermitian"] {
                    out.push(MomentCheck::Skipped { name, p, reason: e.to_string() });
                }
                continue;
            }
        };
        let lhs = table.schatten_moment(2.0 * p).powf(1.0 / (2.0 * p));
        let delta_moment: f64 =
            table.entries().iter().zip(&deltas).map(|(o, delta)| o.weight * schatten_power(delta, p)).sum();
        let bdg = bdg_bound(order, delta_moment).expect("nonnegative moment");
        out.push(MomentCheck::Checked { name: "bdg", p, statistic: lhs, bound: bdg, pass: moment_pass(lhs, bdg) });

        match (&supports, &second) {
            (Some(supports), Some(second)) => {
                let k = if ensemble.family() == Family::RademacherSeries {
                    khintchine(order, &HermitianMatrix::sum(d, second), None)
                } else {
                    let caps: Vec<HermitianMatrix> = supports
                        .iter()
                        .map(|s| {
                            let r = s.iter().map(|a| norm(&a.matrix)).fold(0.0, f64::max);
                            HermitianMatrix::scalar(d, r * r)
                        })
                        .collect();
                    khintchine(order, &HermitianMatrix::sum(d, &caps), Some(&HermitianMatrix::sum(d, second)))
                }
                .expect("psd inputs by construction");
                out.push(MomentCheck::Checked { name: "khintchine", p, statistic: lhs, bound: k, pass: moment_pass(lhs, k) });

                // Rosenthal for the psd summands P_k = Y_k².
                let per_summand: f64 = supports
                    .iter()
                    .map(|s| s.iter().map(|a| a.weight * schatten_power(&a.matrix.square(), 2.0 * p)).sum::<f64>())
                    .sum();
                let mean_norm = schatten_norm(&HermitianMatrix::sum(d, second), 2.0 * p).expect("finite");
                let psd_stat: f64 = table
                    .entries()
                    .iter()
                    .map(|o| {
                        let squares: Vec<HermitianMatrix> =
                            atoms_of(supports, &o.state).into_iter().map(HermitianMatrix::square).collect();
                        o.weight * schatten_power(&HermitianMatrix::sum(d, &squares), 2.0 * p)
                    })
                    .sum::<f64>()
                    .powf(1.0 / (2.0 * p));
                let psd = rosenthal_psd(order, mean_norm, per_summand).expect("nonnegative inputs");
                out.push(MomentCheck::Checked {
                    name: "rosenthal_psd",
                    p,
                    statistic: psd_stat,
                    bound: psd,
                    pass: moment_pass(psd_stat, psd),
                });

                // Hermitian Rosenthal at order 4p.
                let q = 4.0 * p;
                let variance_norm = {
                    let s = HermitianMatrix::sum(d, second);
                    let e = eig_hermitian(&s).expect("finite");
                    e.eigenvalues().iter().map(|l| l.max(0.0).powf(2.0 * p)).sum::<f64>().powf(1.0 / q)
                };
                let summand_moments: f64 = supports
                    .iter()
                    .map(|s| s.iter().map(|a| a.weight * schatten_power(&a.matrix, q)).sum::<f64>())
                    .sum();
                let herm_stat = table.schatten_moment(q).powf(1.0 / q);
                let herm = rosenthal_hermitian(order, variance_norm, summand_moments).expect("nonnegative inputs");
                out.push(MomentCheck::Checked {
                    name: "rosenthal_hermitian",
                    p,
                    statistic: herm_stat,
                    bound: herm,
                    pass: moment_pass(herm_stat, herm),
                });
            }
            _ => {
                for name in ["khintchine", "rosenthal_psd", "rosenthal_hermitian"] {
                    out.push(MomentCheck::Skipped { name, p, reason: "needs independent summands".into() });
                }
            }
        }
    }
    out
}
