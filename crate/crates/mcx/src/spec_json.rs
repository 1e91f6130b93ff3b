//! Ensemble specification files.
//!
//! ```json
//! {"family": "rademacher_series", "coefficients": [[[1, 0], [0, -1]]]}
//! ```
//!
//! A matrix is a list of rows. Each entry is either a real number or a
//! `[re, im]` pair. Payload keys by family:
//!
//! | family | keys |
//! |---|---|
//! | `independent_sum` | `supports`: list of `[{"weight": w, "matrix": M}, ...]` |
//! | `rademacher_series` | `coefficients`: list of `M` |
//! | `rademacher_modulated` | `draws`: list of `{"weight": w, "matrices": [M, ...]}` |
//! | `combinatorial_sum` | `array`: `n × n` list of `M` |
//! | `sampling_without_replacement` | `matrices`: list of `M`, `samples`: integer |
//! | `permuted_inner_product` | `left`: list of `d1 × s` matrices, `right`: list of `s × d2` matrices |
//! | `rademacher_chaos` | `array`: `n × n` list of `M`, symmetric with zero diagonal |
//!
//! An optional `description` string is allowed everywhere at top level.
//! Unknown keys are rejected. Errors carry a JSON pointer to the offending
//! value.

use mcx_core::ensembles::{CoefficientDraw, WeightedMatrix};
use mcx_core::{Complex64, Ensemble, EnsembleError, EnsembleSpec, GeneralMatrix, HermitianMatrix, LinalgError};
use serde_json::{Map, Value};

use crate::format::Json;

#[derive(Debug, Clone, PartialEq)]
pub struct SpecError {
    pub pointer: String,
    pub reason: String,
}

impl std::fmt::Display for SpecError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let at = if self.pointer.is_empty() { "(root)" } else { &self.pointer };
        write!(f, "invalid spec at {at}: {}", self.reason)
    }
}

impl std::error::Error for SpecError {}

fn err(pointer: &str, reason: impl Into<String>) -> SpecError {
    SpecError { pointer: pointer.to_string(), reason: reason.into() }
}

/// Parses and validates a specification, returning the built ensemble.
pub fn load_ensemble(text: &str) -> Result<Ensemble, SpecError> {
    let spec = parse_spec(text)?;
    Ensemble::new(spec).map_err(ensemble_error)
}

pub fn ensemble_error(e: EnsembleError) -> SpecError {
    match e {
        EnsembleError::Invalid { path, reason } => SpecError { pointer: path, reason },
        other => err("", other.to_string()),
    }
}

pub fn parse_spec(text: &str) -> Result<EnsembleSpec, SpecError> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| err("", format!("malformed JSON (line {}, column {}): {e}", e.line(), e.column())))?;
    spec_from_value(&value)
}

pub fn spec_from_value(value: &Value) -> Result<EnsembleSpec, SpecError> {
    let obj = value.as_object().ok_or_else(|| err("", "expected an object"))?;
    let family = obj
        .get("family")
        .ok_or_else(|| err("/family", "missing"))?
        .as_str()
        .ok_or_else(|| err("/family", "expected a string"))?;
    let allowed: &[&str] = match family {
        "independent_sum" => &["supports"],
        "rademacher_series" => &["coefficients"],
        "rademacher_modulated" => &["draws"],
        "combinatorial_sum" | "rademacher_chaos" => &["array"],
        "sampling_without_replacement" => &["matrices", "samples"],
        "permuted_inner_product" => &["left", "right"],
        other => return Err(err("/family", format!("unknown family {other:?}"))),
    };
    for (k, v) in obj {
        if k == "family" {
            continue;
        }
        if k == "description" {
            if !v.is_string() {
                return Err(err("/description", "expected a string"));
            }
            continue;
        }
        if !allowed.contains(&k.as_str()) {
            return Err(err(&format!("/{}", escape(k)), format!("unknown key for family {family}")));
        }
    }
    let field = |k: &str| obj.get(k).ok_or_else(|| err(&format!("/{k}"), "missing"));
    Ok(match family {
        "independent_sum" => {
            let supports = list(field("supports")?, "/supports", |v, p| {
                list(v, p, |atom, ap| {
                    let a = object(atom, ap, &["weight", "matrix"])?;
                    Ok(WeightedMatrix {
                        weight: number(get(a, ap, "weight")?, &format!("{ap}/weight"))?,
                        matrix: hermitian(get(a, ap, "matrix")?, &format!("{ap}/matrix"))?,
                    })
                })
            })?;
            EnsembleSpec::IndependentSum { supports }
        }
        "rademacher_series" => {
            EnsembleSpec::RademacherSeries { coefficients: list(field("coefficients")?, "/coefficients", hermitian)? }
        }
        "rademacher_modulated" => {
            let draws = list(field("draws")?, "/draws", |v, p| {
                let d = object(v, p, &["weight", "matrices"])?;
                Ok(CoefficientDraw {
                    weight: number(get(d, p, "weight")?, &format!("{p}/weight"))?,
                    matrices: list(get(d, p, "matrices")?, &format!("{p}/matrices"), hermitian)?,
                })
            })?;
            EnsembleSpec::RademacherModulated { draws }
        }
        "combinatorial_sum" => {
            EnsembleSpec::CombinatorialSum { array: list(field("array")?, "/array", |v, p| list(v, p, hermitian))? }
        }
        "rademacher_chaos" => {
            EnsembleSpec::RademacherChaos { array: list(field("array")?, "/array", |v, p| list(v, p, hermitian))? }
        }
        "sampling_without_replacement" => {
            let samples = field("samples")?
                .as_u64()
                .ok_or_else(|| err("/samples", "expected a nonnegative integer"))?;
            EnsembleSpec::SamplingWithoutReplacement {
                matrices: list(field("matrices")?, "/matrices", hermitian)?,
                samples: usize::try_from(samples).map_err(|_| err("/samples", "too large"))?,
            }
        }
        "permuted_inner_product" => EnsembleSpec::PermutedInnerProduct {
            left: list(field("left")?, "/left", general)?,
            right: list(field("right")?, "/right", general)?,
        },
        _ => unreachable!(),
    })
}

fn escape(key: &str) -> String {
    key.replace('~', "~0").replace('/', "~1")
}

fn object<'a>(v: &'a Value, path: &str, keys: &[&str]) -> Result<&'a Map<String, Value>, SpecError> {
    let o = v.as_object().ok_or_else(|| err(path, "expected an object"))?;
    for k in o.keys() {
        if !keys.contains(&k.as_str()) {
            return Err(err(&format!("{path}/{}", escape(k)), "unknown key"));
        }
    }
    Ok(o)
}

fn get<'a>(o: &'a Map<String, Value>, path: &str, key: &str) -> Result<&'a Value, SpecError> {
    o.get(key).ok_or_else(|| err(&format!("{path}/{key}"), "missing"))
}

fn list<T>(v: &Value, path: &str, item: impl Fn(&Value, &str) -> Result<T, SpecError>) -> Result<Vec<T>, SpecError> {
    let arr = v.as_array().ok_or_else(|| err(path, "expected an array"))?;
    arr.iter().enumerate().map(|(i, x)| item(x, &format!("{path}/{i}"))).collect()
}

fn number(v: &Value, path: &str) -> Result<f64, SpecError> {
    let x = v.as_f64().ok_or_else(|| err(path, "expected a number"))?;
    if x.is_finite() {
        Ok(x)
    } else {
        Err(err(path, "must be finite"))
    }
}

fn entry(v: &Value, path: &str) -> Result<Complex64, SpecError> {
    match v {
        Value::Number(_) => Ok(Complex64::new(number(v, path)?, 0.0)),
        Value::Array(pair) if pair.len() == 2 => {
            Ok(Complex64::new(number(&pair[0], &format!("{path}/0"))?, number(&pair[1], &format!("{path}/1"))?))
        }
        _ => Err(err(path, "expected a number or a [re, im] pair")),
    }
}

fn rows(v: &Value, path: &str) -> Result<(usize, usize, Vec<Complex64>), SpecError> {
    let rows = list(v, path, |r, rp| list(r, rp, entry))?;
    if rows.is_empty() {
        return Err(err(path, "matrix has no rows"));
    }
    let cols = rows[0].len();
    if cols == 0 {
        return Err(err(&format!("{path}/0"), "matrix has no columns"));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != cols {
            return Err(err(&format!("{path}/{i}"), format!("row has {} entries, expected {cols}", r.len())));
        }
    }
    let n = rows.len();
    Ok((n, cols, rows.into_iter().flatten().collect()))
}

fn general(v: &Value, path: &str) -> Result<GeneralMatrix, SpecError> {
    let (r, c, data) = rows(v, path)?;
    GeneralMatrix::new(r, c, data).map_err(|e| err(path, e.to_string()))
}

fn hermitian(v: &Value, path: &str) -> Result<HermitianMatrix, SpecError> {
    let (r, c, data) = rows(v, path)?;
    if r != c {
        return Err(err(path, format!("expected a square matrix, found {r}x{c}")));
    }
    HermitianMatrix::new(r, data).map_err(|e| match e {
        LinalgError::NotHermitian { row, col, residual } => {
            err(&format!("{path}/{row}/{col}"), format!("not Hermitian (residual {})", crate::format::g12(residual)))
        }
        other => err(path, other.to_string()),
    })
}

/// Matrix as rows of `[re, im]` pairs.
pub fn matrix_json(rows: usize, cols: usize, at: impl Fn(usize, usize) -> Complex64) -> Json {
    Json::Arr(
        (0..rows)
            .map(|i| Json::Arr((0..cols).map(|j| Json::nums(&[at(i, j).re, at(i, j).im])).collect()))
            .collect(),
    )
}

pub fn hermitian_json(m: &HermitianMatrix) -> Json {
    matrix_json(m.dim(), m.dim(), |i, j| m.get(i, j))
}

pub fn general_json(m: &GeneralMatrix) -> Json {
    matrix_json(m.rows(), m.cols(), |i, j| m.get(i, j))
}

/// Canonical JSON form of a specification. Round-trips through
/// [`parse_spec`].
pub fn spec_json(spec: &EnsembleSpec) -> Json {
    let b = Json::obj().str("family", spec.family().name());
    let hlist = |ms: &[HermitianMatrix]| Json::Arr(ms.iter().map(hermitian_json).collect());
    let harray = |a: &[Vec<HermitianMatrix>]| Json::Arr(a.iter().map(|r| hlist(r)).collect());
    match spec {
        EnsembleSpec::IndependentSum { supports } => b.field(
            "supports",
            Json::Arr(
                supports
                    .iter()
                    .map(|s| {
                        Json::Arr(
                            s.iter()
                                .map(|a| Json::obj().num("weight", a.weight).field("matrix", hermitian_json(&a.matrix)).build())
                                .collect(),
                        )
                    })
                    .collect(),
            ),
        ),
        EnsembleSpec::RademacherSeries { coefficients } => b.field("coefficients", hlist(coefficients)),
        EnsembleSpec::RademacherModulated { draws } => b.field(
            "draws",
            Json::Arr(
                draws.iter().map(|d| Json::obj().num("weight", d.weight).field("matrices", hlist(&d.matrices)).build()).collect(),
            ),
        ),
        EnsembleSpec::CombinatorialSum { array } | EnsembleSpec::RademacherChaos { array } => b.field("array", harray(array)),
        EnsembleSpec::SamplingWithoutReplacement { matrices, samples } => {
            b.field("matrices", hlist(matrices)).int("samples", *samples as i128)
        }
        EnsembleSpec::PermutedInnerProduct { left, right } => b
            .field("left", Json::Arr(left.iter().map(general_json).collect()))
            .field("right", Json::Arr(right.iter().map(general_json).collect())),
    }
    .build()
}
