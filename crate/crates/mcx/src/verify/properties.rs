//! Fuzzed property checks for the matrix inequalities and Stein-pair
//! identities the bounds rest on.
//!
//! Every property runs `cases` cases over dimensions drawn cyclically from
//! [`DIMS`]. Case `i` of property `k` draws from
//! `CounterRng::for_stream(seed, k << 32 | i)`, so a single case can be
//! replayed in isolation. The first failing case is reported with its
//! inputs.

use std::collections::BTreeMap;

use mcx_core::bounds::theta_star;
use mcx_core::ensembles::{CoefficientDraw, WeightedMatrix};
use mcx_core::linalg::{
    eig_hermitian, hermitian_dilation, lambda_max, matrix_entropy, matrix_function, psd_leq, schatten_norm,
    spectral_norm, Interval,
};
use mcx_core::stein::exchangeability_violation;
use mcx_core::{
    Complex64, CounterRng, Ensemble, EnsembleSpec, GeneralMatrix, HermitianMatrix, State, SteinPairModel,
};

use super::buchholz::buchholz_row;
use crate::format::{g12, Json};
use crate::spec_json::{general_json, hermitian_json, spec_json};

pub const DIMS: [usize; 5] = [1, 2, 3, 5, 8];

/// Relative slack for the trace inequalities.
pub const INEQUALITY_TOL: f64 = 1e-9;

/// Deliberate defects for checking that the suite can fail.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    None,
    /// Standard matrix functions are assembled as `Q f(Λ) Qᵀ` and then
    /// symmetrised, dropping the complex conjugation.
    ConjugationDropped,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Counterexample {
    pub case: u64,
    pub dim: usize,
    pub detail: String,
    pub inputs: Json,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub cases: u64,
    pub failure: Option<Counterexample>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyReport {
    pub seed: u64,
    pub cases: u64,
    pub results: Vec<PropertyResult>,
}

impl PropertyReport {
    pub fn pass(&self) -> bool {
        self.results.iter().all(|r| r.failure.is_none())
    }

    pub fn result(&self, name: &str) -> Option<&PropertyResult> {
        self.results.iter().find(|r| r.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = format!("property suite: seed {}, {} cases per property\n", self.seed, self.cases);
        for r in &self.results {
            match &r.failure {
                None => out.push_str(&format!("PASS {} ({} cases)\n", r.name, r.cases)),
                Some(c) => {
                    out.push_str(&format!("FAIL {} (case {}, dim {}): {}\n", r.name, c.case, c.dim, c.detail));
                    out.push_str(&format!("  witness: {}\n", c.inputs.render_compact()));
                }
            }
        }
        let failed = self.results.iter().filter(|r| r.failure.is_some()).count();
        out.push_str(&format!("summary: {} passed, {} failed\n", self.results.len() - failed, failed));
        out
    }
}

struct Ctx {
    fault: Fault,
}

type Failure = (String, Json);
type Check = fn(&Ctx, &mut CounterRng, usize) -> Result<(), Failure>;

const FUZZED: &[(&str, Check)] = &[
    ("spectral_mapping", spectral_mapping),
    ("operator_jensen", operator_jensen),
    ("square_convexity", square_convexity),
    ("holder_trace", holder_trace),
    ("schwarz_type", schwarz_type),
    ("mvti_exp_positive", mvti_exp_positive),
    ("mvti_exp_negative", mvti_exp_negative),
    ("mvti_power", mvti_power),
    ("entropy_young", entropy_young),
    ("dilation_identities", dilation_identities),
    ("theta_star_plug_back", theta_star_plug_back),
    ("stein_residual", stein_residual),
    ("conditional_variance", conditional_variance),
    ("exchangeability", exchangeability),
    ("mean_delta", mean_delta),
    ("stein_identity", stein_identity),
    ("boundedness", boundedness),
];

/// Runs every property with `cases` cases each.
pub fn property_suite(seed: u64, cases: u64) -> PropertyReport {
    property_suite_with(seed, cases, Fault::None, &DIMS)
}

/// Like [`property_suite`] with an injected fault and a custom dimension
/// cycle.
pub fn property_suite_with(seed: u64, cases: u64, fault: Fault, dims: &[usize]) -> PropertyReport {
    assert!(cases >= 1, "cases must be at least 1");
    assert!(!dims.is_empty() && dims.iter().all(|&d| d >= 1), "dimensions must be positive");
    let ctx = Ctx { fault };
    let mut results = Vec::with_capacity(FUZZED.len() + 1);
    for (k, (name, check)) in FUZZED.iter().enumerate() {
        let mut failure = None;
        for i in 0..cases {
            let dim = dims[(i % dims.len() as u64) as usize];
            let mut rng = CounterRng::for_stream(seed, ((k as u64) << 32) | i);
            if let Err((detail, inputs)) = check(&ctx, &mut rng, dim) {
                failure = Some(Counterexample { case: i, dim, detail, inputs });
                break;
            }
        }
        results.push(PropertyResult { name, cases, failure });
    }
    results.push(buchholz_property());
    PropertyReport { seed, cases, results }
}

fn buchholz_property() -> PropertyResult {
    const MAX_P: u32 = 20;
    let failure = (1..=MAX_P).map(buchholz_row).find(|r| !r.proven).map(|r| Counterexample {
        case: u64::from(r.p - 1),
        dim: 1,
        detail: format!("(2p-1)^p < e^(p-1/2) (2p-1)!! not certified at p = {}", r.p),
        inputs: Json::obj().int("p", r.p).build(),
    });
    PropertyResult { name: "buchholz_constant", cases: u64::from(MAX_P), failure }
}

// ---------------------------------------------------------------- helpers

fn random_hermitian(rng: &mut CounterRng, d: usize, scale: f64) -> HermitianMatrix {
    let mut data = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        data[i * d + i] = Complex64::new(scale * rng.uniform_in(-1.0, 1.0), 0.0);
        for j in (i + 1)..d {
            let z = Complex64::new(scale * rng.uniform_in(-1.0, 1.0), scale * rng.uniform_in(-1.0, 1.0));
            data[i * d + j] = z;
            data[j * d + i] = z.conj();
        }
    }
    HermitianMatrix::new(d, data).expect("Hermitian by construction")
}

fn random_general(rng: &mut CounterRng, rows: usize, cols: usize) -> GeneralMatrix {
    let data = (0..rows * cols).map(|_| Complex64::new(rng.uniform_in(-1.0, 1.0), rng.uniform_in(-1.0, 1.0))).collect();
    GeneralMatrix::new(rows, cols, data).expect("finite entries")
}

/// `G G*`, rank deficient one time in five.
fn random_psd(rng: &mut CounterRng, d: usize) -> HermitianMatrix {
    let rank = if rng.uniform() < 0.2 { 1 + rng.index(d) } else { d };
    let g = random_general(rng, d, rank);
    HermitianMatrix::hermitian_part(&(&g * &g.adjoint()))
}

fn func(ctx: &Ctx, a: &HermitianMatrix, f: impl Fn(f64) -> f64) -> HermitianMatrix {
    match ctx.fault {
        Fault::None => matrix_function(a, f, Interval::real()).expect("finite matrix"),
        Fault::ConjugationDropped => {
            let e = eig_hermitian(a).expect("finite matrix");
            let q = e.unitary();
            let d = a.dim();
            let mut data = vec![Complex64::new(0.0, 0.0); d * d];
            for i in 0..d {
                for j in 0..d {
                    data[i * d + j] =
                        e.eigenvalues().iter().enumerate().map(|(k, &l)| q.get(i, k) * q.get(j, k) * f(l)).sum();
                }
            }
            HermitianMatrix::hermitian_part(&GeneralMatrix::new(d, d, data).expect("finite entries"))
        }
    }
}

/// Normalised real trace.
fn ntr(m: &GeneralMatrix) -> f64 {
    m.trace().re / m.rows() as f64
}

fn eigs(a: &HermitianMatrix) -> Vec<f64> {
    eig_hermitian(a).expect("finite matrix").eigenvalues().to_vec()
}

fn slack(values: &[f64]) -> f64 {
    INEQUALITY_TOL * values.iter().fold(0.0f64, |m, v| m.max(v.abs())) + 1e-14
}

fn h(m: &HermitianMatrix) -> Json {
    hermitian_json(m)
}

fn fail(detail: String, inputs: Json) -> Result<(), Failure> {
    Err((detail, inputs))
}

// ------------------------------------------------------------- linalg

fn spectral_mapping(ctx: &Ctx, rng: &mut CounterRng, d: usize) -> Result<(), Failure> {
    let a = random_hermitian(rng, d, 1.0);
    let theta = rng.uniform_in(-2.0, 2.0);
    let p = rng.uniform_in(1.5, 3.0);
    let fs: [(&str, Box<dyn Fn(f64) -> f64>); 4] = [
        ("exp", Box::new(move |x: f64| (theta * x).exp())),
        ("abs", Box::new(f64::abs)),
        ("cube", Box::new(|x: f64| x * x * x)),
        ("signed_power", Box::new(move |x: f64| x.signum() * x.abs().powf(2.0 * p - 1.0))),
    ];
    let base = eigs(&a);
    for (name, f) in fs.iter() {
        let mut want: Vec<f64> = base.iter().map(|&l| f(l)).collect();
        want.sort_by(f64::total_cmp);
        let got = eigs(&func(ctx, &a, f));
        let scale = want.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let gap = want.iter().zip(&got).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        if gap > 1e-10 * scale {
            return fail(
                format!("{name}: spectrum of f(A) misses f(spectrum of A) by {}", g12(gap)),
                Json::obj().field("A", h(&a)).num("theta", theta).num("p", p).build(),
            );
        }
    }
    Ok(())
}

fn operator_jensen(_: &Ctx, rng: &mut CounterRng, d: usize) -> Result<(), Failure> {
    let n = 1 + rng.index(6);
    let xs: Vec<HermitianMatrix> = (0..n).map(|_| random_hermitian(rng, d, 1.0)).collect();
    let mean = HermitianMatrix::sum(d, &xs).scale(1.0 / n as f64);
    let squares: Vec<HermitianMatrix> = xs.iter().map(HermitianMatrix::square).collect();
    let mean_sq = HermitianMatrix::sum(d, &squares).scale(1.0 / n as f64);
    if !psd_leq(&mean.square(), &mean_sq, 1e-10).expect("same dimension") {
        return fail("(mean X)^2 is not below mean(X^2)".into(), Json::obj().field("X", Json::Arr(xs.iter().map(h).collect())).build());
    }
    Ok(())
}

fn square_convexity(_: &Ctx, rng: &mut CounterRng, d: usize) -> Result<(), Failure> {
    let a = random_hermitian(rng, d, 1.0);
    let b = random_hermitian(rng, d, 1.0);
    let tau = rng.uniform();
    let mid = &a.scale(tau) + &b.scale(1.0 - tau);
    let chord = &a.square().scale(tau) + &b.square().scale(1.0 - tau);
    if !psd_leq(&mid.square(), &chord, 1e-10).expect("same dimension") {
        return fail(
            "(tA + (1-t)B)^2 is not below tA^2 + (1-t)B^2".into(),
            Json::obj().field("A", h(&a)).field("B", h(&b)).num("t", tau).build(),
        );
    }
    Ok(())
}

fn holder_trace(_: &Ctx, rng: &mut CounterRng, d: usize) -> Result<(), Failure> {
    let b = random_hermitian(rng, d, 1.0);
    let c = random_hermitian(rng, d, 1.0);
    let lhs = b.mul(&c).trace().re;
    for (p, q) in [(1.0, f64::INFINITY), (2.0, 2.0), (3.0, 1.5)] {
        let rhs = schatten_norm(&b, p).expect("finite") * schatten_norm(&c, q).expect("finite");
        if lhs > rhs + slack(&[lhs, rhs]) {
            return fail(
                format!("tr(BC) = {} exceeds |B|_{} |C|_{} = {}", g12(lhs), g12(p), g12(q), g12(rhs)),
                Json::obj().field("B", h(&b)).field("C", h(&c)).build(),
            );
        }
    }
    Ok(())
}

fn schwarz_type(_: &Ctx, rng: &mut CounterRng, d: usize) -> Result<(), Failure> {
    let k = 1 + rng.index(4);
    let p = [1.0, 1.5, 2.0, 3.0][rng.index(4)];
    let a: Vec<HermitianMatrix> = (0..k).map(|_| random_psd(rng, d)).collect();
    let squares: Vec<HermitianMatrix> = a.iter().map(HermitianMatrix::square).collect();
    let lhs = schatten_norm(&HermitianMatrix::sum(d, &squares), p).expect("finite");
    let moments: f64 = a.iter().map(|m| schatten_norm(m, 2.0 * p).expect("finite").powf(2.0 * p)).sum();
    let rhs = moments.powf(1.0 / (2.0 * p)) * schatten_norm(&HermitianMatrix::sum(d, &a), 2.0 * p).expect("finite");
    if lhs > rhs + slack(&[lhs, rhs]) {
        return fail(
            format!("|sum A_k^2|_p = {} exceeds {} at p = {}", g12(lhs), g12(rhs), g12(p)),
            Json::obj().field("A", Json::Arr(a.iter().map(h).collect())).num("p", p).build(),
        );
    }
    Ok(())
}

/// Both sides of `tr̄[(g(A)−g(B))(h(A)−h(B))] ≤ ½ tr̄[(g(A)−g(B))(A−B)(h′(A)+h′(B))]`.
fn mvti_sides(
    ctx: &Ctx,
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    g: &dyn Fn(f64) -> f64,
    hf: &dyn Fn(f64) -> f64,
    dh: &dyn Fn(f64) -> f64,
) -> (f64, f64) {
    let dg = &func(ctx, a, g) - &func(ctx, b, g);
    let dhm = &func(ctx, a, hf) - &func(ctx, b, hf);
    let lhs = ntr(&dg.mul(&dhm));
    let diff = a - b;
    let deriv = &func(ctx, a, dh) + &func(ctx, b, dh);
    let rhs = 0.5 * ntr(&(&dg.mul(&diff) * &deriv.to_general()));
    (lhs, rhs)
}

fn mvti_exp(ctx: &Ctx, rng: &mut CounterRng, d: usize, positive: bool) -> Result<(), Failure> {
    let a = random_hermitian(rng, d, 1.0);
    let b = random_hermitian(rng, d, 1.0);
    let mag = rng.uniform_in(0.05, 2.0);
    let theta = if positive { mag } else { -mag };
    let (lhs, rhs) = mvti_sides(ctx, &a, &b, &|x| x, &|x| (theta * x).exp(), &|x| theta * (theta * x).exp());
    // h′ = θe^{θx} is convex for θ > 0 and concave for θ < 0, which flips the
    // inequality.
    let holds = if positive { lhs <= rhs + slack(&[lhs, rhs]) } else { lhs >= rhs - slack(&[lhs, rhs]) };
    if !holds {
        let rel = if positive { "<=" } else { ">=" };
        return fail(
            format!("expected lhs {rel} rhs, got lhs = {}, rhs = {}", g12(lhs), g12(rhs)),
            Json::obj().field("A", h(&a)).field("B", h(&b)).num("theta", theta).build(),
        );
    }
    Ok(())
}

fn mvti_exp_positive(ctx: &Ctx, rng: &mut CounterRng, d: usize) -> Result<(), Failure> {
    mvti_exp(ctx, rng, d, true)
}

fn mvti_exp_negative(ctx: &Ctx, rng: &mut CounterRng, d: usize) -> Result<(), Failure> {
    mvti_exp(ctx, rng, d, false)
}

fn mvti_power(ctx: &Ctx, rng: &mut CounterRng, d: usize) -> Result<(), Failure> {
    let a = random_hermitian(rng, d, 1.0);
    let b = random_hermitian(rng, d, 1.0);
    let p = rng.uniform_in(1.5, 3.0);
    let q = 2.0 * p - 1.0;
    let g = move |x: f64| x.signum() * x.abs().powf(q);
    let dh = move |x: f64| q * x.abs().powf(q - 1.0);
    let (lhs, rhs) = mvti_sides(ctx, &a, &b, &g, &g, &dh);
    if lhs > rhs + slack(&[lhs, rhs]) {
        return fail(
            format!("lhs = {} exceeds rhs = {}", g12(lhs), g12(rhs)),
            Json::obj().field("A", h(&a)).field("B", h(&b)).num("p", p).build(),
        );
    }
    Ok(())
}

fn entropy_young(ctx: &Ctx, rng: &mut CounterRng, d: usize) -> Result<(), Failure> {
    let v = random_hermitian(rng, d, 2.0);
    let w0 = random_psd(rng, d);
    let w = w0.scale(d as f64 / w0.diagonal_re().iter().sum::<f64>());
    let lhs = ntr(&v.mul(&w));
    let exp_v = func(ctx, &v, f64::exp);
    let rhs = (exp_v.diagonal_re().iter().sum::<f64>() / d as f64).ln() + matrix_entropy(&w).expect("psd by construction");
    if lhs > rhs + slack(&[lhs, rhs]) {
        return fail(
            format!("tr(VW) = {} exceeds log tr e^V + ent(W) = {}", g12(lhs), g12(rhs)),
            Json::obj().field("V", h(&v)).field("W", h(&w)).build(),
        );
    }
    Ok(())
}

fn dilation_identities(_: &Ctx, rng: &mut CounterRng, d: usize) -> Result<(), Failure> {
    let d2 = DIMS[rng.index(DIMS.len())];
    let b = random_general(rng, d, d2);
    let dil = hermitian_dilation(&b);
    let sq = dil.square();
    let bb = &b * &b.adjoint();
    let btb = &b.adjoint() * &b;
    let mut gap: f64 = 0.0;
    for i in 0..d + d2 {
        for j in 0..d + d2 {
            let want = match (i < d, j < d) {
                (true, true) => bb.get(i, j),
                (false, false) => btb.get(i - d, j - d),
                _ => Complex64::new(0.0, 0.0),
            };
            gap = gap.max((sq.get(i, j) - want).norm());
        }
    }
    let scale = bb.max_abs().max(1.0);
    if gap > 1e-12 * scale {
        return fail(format!("D(B)^2 differs from diag(BB*, B*B) by {}", g12(gap)), Json::obj().field("B", general_json(&b)).build());
    }
    let top = lambda_max(&dil).expect("finite");
    let norm = spectral_norm(&dil).expect("finite");
    let sigma = lambda_max(&HermitianMatrix::hermitian_part(&btb)).expect("finite").max(0.0).sqrt();
    if (top - norm).abs() > 1e-10 * norm.max(1.0) || (top - sigma).abs() > 1e-10 * sigma.max(1.0) {
        return fail(
            format!("lambda_max(D) = {}, |D| = {}, |B| = {}", g12(top), g12(norm), g12(sigma)),
            Json::obj().field("B", general_json(&b)).build(),
        );
    }
    Ok(())
}

fn theta_star_plug_back(_: &Ctx, rng: &mut CounterRng, _: usize) -> Result<(), Failure> {
    // The plug-back map has condition number about 2t/(r√ψ), so t is drawn
    // relative to the natural scale r√ψ.
    let psi = 10f64.powf(rng.uniform_in(-4.0, 4.0));
    let r = 10f64.powf(rng.uniform_in(-4.0, 4.0));
    let t = r * psi.sqrt() * 10f64.powf(rng.uniform_in(-3.0, 3.0));
    let th = theta_star(t, psi, r).expect("positive inputs");
    let back = r * th / (1.0 - th * th / psi);
    if !(th < psi.sqrt()) || (back - t).abs() > 1e-10 * t {
        return fail(
            format!("theta* = {} gives {} for t = {}", g12(th), g12(back), g12(t)),
            Json::obj().num("t", t).num("psi", psi).num("r", r).build(),
        );
    }
    Ok(())
}

// ---------------------------------------------------------------- stein

/// A small random ensemble of dimension `d` from a randomly chosen family,
/// small enough to enumerate together with its pair transitions.
pub fn random_ensemble(rng: &mut CounterRng, d: usize) -> Ensemble {
    let family = if d == 1 { rng.index(6) } else { rng.index(7) };
    let spec = match family {
        0 => {
            let n = 1 + rng.index(3);
            let supports = (0..n)
                .map(|_| {
                    let m = 2 + rng.index(2);
                    let raw: Vec<f64> = (0..m).map(|_| rng.uniform_in(0.2, 1.0)).collect();
                    let total: f64 = raw.iter().sum();
                    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
                    let atoms: Vec<HermitianMatrix> = (0..m).map(|_| random_hermitian(rng, d, 1.0)).collect();
                    let mean = HermitianMatrix::sum(d, &atoms.iter().zip(&weights).map(|(a, &w)| a.scale(w)).collect::<Vec<_>>());
                    atoms.iter().zip(&weights).map(|(a, &w)| WeightedMatrix { weight: w, matrix: a - &mean }).collect()
                })
                .collect();
            EnsembleSpec::IndependentSum { supports }
        }
        1 => EnsembleSpec::RademacherSeries { coefficients: (0..1 + rng.index(4)).map(|_| random_hermitian(rng, d, 1.0)).collect() },
        2 => {
            let n = 1 + rng.index(3);
            let draws = 1 + rng.index(3);
            let raw: Vec<f64> = (0..draws).map(|_| rng.uniform_in(0.2, 1.0)).collect();
            let total: f64 = raw.iter().sum();
            EnsembleSpec::RademacherModulated {
                draws: raw
                    .iter()
                    .map(|w| CoefficientDraw { weight: w / total, matrices: (0..n).map(|_| random_hermitian(rng, d, 1.0)).collect() })
                    .collect(),
            }
        }
        3 => {
            let n = 2 + rng.index(3);
            let mut array: Vec<Vec<HermitianMatrix>> =
                (0..n).map(|_| (0..n).map(|_| random_hermitian(rng, d, 1.0)).collect()).collect();
            let shift = HermitianMatrix::sum(d, array.iter().flatten()).scale(1.0 / (n * n) as f64);
            for m in array.iter_mut().flatten() {
                *m = &*m - &shift;
            }
            EnsembleSpec::CombinatorialSum { array }
        }
        4 => {
            let m = 2 + rng.index(3);
            EnsembleSpec::SamplingWithoutReplacement {
                matrices: (0..m).map(|_| random_hermitian(rng, d, 1.0)).collect(),
                samples: 1 + rng.index(m),
            }
        }
        5 => {
            let n = 2 + rng.index(3);
            let mut array = vec![vec![HermitianMatrix::zeros(d); n]; n];
            for j in 0..n {
                for k in (j + 1)..n {
                    let a = random_hermitian(rng, d, 1.0);
                    array[j][k] = a.clone();
                    array[k][j] = a;
                }
            }
            EnsembleSpec::RademacherChaos { array }
        }
        _ => {
            let d1 = 1 + rng.index(d - 1);
            let inner = 1 + rng.index(3);
            let n = 2 + rng.index(3);
            EnsembleSpec::PermutedInnerProduct {
                left: (0..n).map(|_| random_general(rng, d1, inner)).collect(),
                right: (0..n).map(|_| random_general(rng, inner, d - d1)).collect(),
            }
        }
    };
    Ensemble::new(spec).expect("generated specs are valid")
}

fn model_inputs(model: &SteinPairModel) -> Json {
    Json::obj().field("spec", spec_json(model.ensemble().spec())).build()
}

fn random_model(rng: &mut CounterRng, d: usize) -> SteinPairModel {
    SteinPairModel::new(random_ensemble(rng, d))
}

fn stein_residual(_: &Ctx, rng: &mut CounterRng, d: usize) -> Result<(), Failure> {
    let model = random_model(rng, d);
    let state = model.ensemble().sample_state(rng);
    let res = model.stein_residual(&state).expect("sampled state");
    if res > 1e-10 {
        return fail(format!("residual {} at {state}", g12(res)), model_inputs(&model));
    }
    Ok(())
}

fn conditional_variance(_: &Ctx, rng: &mut CounterRng, d: usize) -> Result<(), Failure> {
    let model = random_model(rng, d);
    let state = model.ensemble().sample_state(rng);
    let closed = model.conditional_variance(&state).expect("sampled state");
    let direct = model.conditional_variance_by_transitions(&state).expect("sampled state");
    let gap = closed.max_abs_diff(&direct);
    if gap > 1e-10 * closed.max_abs().max(1.0) {
        return fail(format!("closed form and transition average differ by {} at {state}", g12(gap)), model_inputs(&model));
    }
    Ok(())
}

fn exchangeability(_: &Ctx, rng: &mut CounterRng, d: usize) -> Result<(), Failure> {
    let model = random_model(rng, d);
    let pairs = model.enumerate_pairs(u128::MAX).expect("small ensemble");
    if let Some((a, b, w)) = exchangeability_violation(&pairs, 1e-12) {
        return fail(format!("P({a} -> {b}) - P({b} -> {a}) = {}", g12(w)), model_inputs(&model));
    }
    Ok(())
}

fn mean_delta(_: &Ctx, rng: &mut CounterRng, d: usize) -> Result<(), Failure> {
    let model = random_model(rng, d);
    let table = model.ensemble().enumerate(u128::MAX).expect("small ensemble");
    let e_delta = table.matrix_expectation(|o| model.conditional_variance(&o.state).expect("enumerated state"));
    let e_sq = table.matrix_expectation(|o| o.x.square());
    let gap = e_delta.max_abs_diff(&e_sq);
    if gap > 1e-10 * e_sq.max_abs().max(1.0) {
        return fail(format!("E Delta differs from E X^2 by {}", g12(gap)), model_inputs(&model));
    }
    Ok(())
}

/// `E[X F(X)] = (1/2α) E[(X − X′)(F(X) − F(X′))]` for `F` the identity, the
/// square and `e^{0.3·}`.
fn stein_identity(ctx: &Ctx, rng: &mut CounterRng, d: usize) -> Result<(), Failure> {
    let model = random_model(rng, d);
    let ens = model.ensemble();
    let table = ens.enumerate(u128::MAX).expect("small ensemble");
    let pairs = model.enumerate_pairs(u128::MAX).expect("small ensemble");
    let fs: [(&str, fn(f64) -> f64); 3] = [("identity", |x| x), ("square", |x| x * x), ("exp(0.3x)", |x| (0.3 * x).exp())];
    for (name, f) in fs {
        let image: BTreeMap<State, HermitianMatrix> =
            table.entries().iter().map(|o| (o.state.clone(), func(ctx, &o.x, f))).collect();
        let mut lhs = GeneralMatrix::zeros(d, d);
        for o in table.entries() {
            lhs = &lhs + &o.x.mul(&image[&o.state]).scale(Complex64::new(o.weight, 0.0));
        }
        let mut rhs = GeneralMatrix::zeros(d, d);
        for p in &pairs {
            let dx = &p.x - &p.x_prime;
            let df = &image[&p.state] - &image[&p.next_state];
            rhs = &rhs + &dx.mul(&df).scale(Complex64::new(p.weight, 0.0));
        }
        let rhs = rhs.scale(Complex64::new(1.0 / (2.0 * model.alpha()), 0.0));
        let gap = lhs.max_abs_diff(&rhs);
        if gap > 1e-9 * lhs.max_abs().max(1.0) {
            return fail(format!("F = {name}: sides differ by {}", g12(gap)), model_inputs(&model));
        }
    }
    Ok(())
}

/// With `v = max λ_max(Δ_X)` over the state space, `Δ_X ⪯ vI`, and every
/// realised `X` satisfies `(α/2)X² ⪯ vI`.
fn boundedness(_: &Ctx, rng: &mut CounterRng, d: usize) -> Result<(), Failure> {
    let model = random_model(rng, d);
    let table = model.ensemble().enumerate(u128::MAX).expect("small ensemble");
    let v = table
        .entries()
        .iter()
        .map(|o| lambda_max(&model.conditional_variance(&o.state).expect("enumerated state")).expect("finite"))
        .fold(0.0, f64::max);
    let cap = HermitianMatrix::scalar(d, v);
    for o in table.entries() {
        let lhs = o.x.square().scale(model.alpha() / 2.0);
        if !psd_leq(&lhs, &cap, 1e-10 * v.max(1.0)).expect("same dimension") {
            return fail(format!("(alpha/2) X^2 exceeds {} I at {}", g12(v), o.state), model_inputs(&model));
        }
    }
    Ok(())
}
