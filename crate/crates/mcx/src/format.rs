//! Number formatting and a small ordered JSON writer.
//!
//! Every number the tool prints goes through [`g12`], which reproduces C's
//! `%.12g`.

use std::fmt::Write as _;

/// C `printf("%.12g", x)`. Negative zero prints as `0`.
pub fn g12(x: f64) -> String {
    fmt_g(x, 12)
}

pub fn fmt_g(x: f64, precision: usize) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let p = precision.max(1);
    // Round once in scientific form to learn the decimal exponent after
    // rounding, exactly as %g does.
    let sci = format!("{:.*e}", p - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("exponent digits");
    if exp < -4 || exp >= p as i32 {
        let mantissa = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_string()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// JSON value with insertion-ordered objects.
#[derive(Debug, Clone, PartialEq)]
pub enum Json {
    Null,
    Bool(bool),
    /// Printed with `%.12g`; non-finite values become `null`.
    Num(f64),
    Int(i128),
    Str(String),
    Arr(Vec<Json>),
    Obj(Vec<(String, Json)>),
}

impl Json {
    pub fn obj() -> ObjBuilder {
        ObjBuilder(Vec::new())
    }

    pub fn nums(values: &[f64]) -> Json {
        Json::Arr(values.iter().map(|&v| Json::Num(v)).collect())
    }

    pub fn str(s: impl Into<String>) -> Json {
        Json::Str(s.into())
    }

    fn is_scalar(&self) -> bool {
        !matches!(self, Json::Arr(_) | Json::Obj(_))
    }

    /// Pretty output with two-space indentation and a trailing newline.
    /// Arrays holding only scalars stay on one line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.write(&mut out, 0);
        out.push('\n');
        out
    }

    /// Single-line output without a trailing newline.
    pub fn render_compact(&self) -> String {
        match self {
            Json::Arr(items) => {
                let parts: Vec<String> = items.iter().map(Json::render_compact).collect();
                format!("[{}]", parts.join(","))
            }
            Json::Obj(fields) => {
                let parts: Vec<String> = fields
                    .iter()
                    .map(|(k, v)| format!("{}:{}", serde_json::to_string(k).expect("key serialisation"), v.render_compact()))
                    .collect();
                format!("{{{}}}", parts.join(","))
            }
            scalar => {
                let mut out = String::new();
                scalar.write(&mut out, 0);
                out
            }
        }
    }

    fn write(&self, out: &mut String, indent: usize) {
        match self {
            Json::Null => out.push_str("null"),
            Json::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
            Json::Num(x) => {
                if x.is_finite() {
                    out.push_str(&g12(*x));
                } else {
                    out.push_str("null");
                }
            }
            Json::Int(i) => {
                let _ = write!(out, "{i}");
            }
            Json::Str(s) => out.push_str(&serde_json::to_string(s).expect("string serialisation")),
            Json::Arr(items) => {
                if items.is_empty() {
                    out.push_str("[]");
                } else if items.iter().all(Json::is_scalar) {
                    out.push('[');
                    for (i, item) in items.iter().enumerate() {
                        if i > 0 {
                            out.push_str(", ");
                        }
                        item.write(out, indent);
                    }
                    out.push(']');
                } else {
                    out.push_str("[\n");
                    for (i, item) in items.iter().enumerate() {
                        pad(out, indent + 1);
                        item.write(out, indent + 1);
                        if i + 1 < items.len() {
                            out.push(',');
                        }
                        out.push('\n');
                    }
                    pad(out, indent);
                    out.push(']');
                }
            }
            Json::Obj(fields) => {
                if fields.is_empty() {
                    out.push_str("{}");
                    return;
                }
                out.push_str("{\n");
                for (i, (k, v)) in fields.iter().enumerate() {
                    pad(out, indent + 1);
                    out.push_str(&serde_json::to_string(k).expect("key serialisation"));
                    out.push_str(": ");
                    v.write(out, indent + 1);
                    if i + 1 < fields.len() {
                        out.push(',');
                    }
                    out.push('\n');
                }
                pad(out, indent);
                out.push('}');
            }
        }
    }
}

fn pad(out: &mut String, indent: usize) {
    for _ in 0..indent {
        out.push_str("  ");
    }
}

pub struct ObjBuilder(Vec<(String, Json)>);

impl ObjBuilder {
    pub fn field(mut self, key: &str, value: Json) -> Self {
        self.0.push((key.to_string(), value));
        self
    }

    pub fn num(self, key: &str, value: f64) -> Self {
        self.field(key, Json::Num(value))
    }

    pub fn int(self, key: &str, value: impl Into<i128>) -> Self {
        self.field(key, Json::Int(value.into()))
    }

    pub fn str(self, key: &str, value: impl Into<String>) -> Self {
        self.field(key, Json::Str(value.into()))
    }

    pub fn opt_num(self, key: &str, value: Option<f64>) -> Self {
        self.field(key, value.map_or(Json::Null, Json::Num))
    }

    pub fn build(self) -> Json {
        Json::Obj(self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        let cases = [
            (0.0, "0"),
            (-0.0, "0"),
            (1.0, "1"),
            (0.5, "0.5"),
            (0.109375, "0.109375"),
            (2.4609375, "2.4609375"),
            (1.0 / 3.0, "0.333333333333"),
            (123456789012.0, "123456789012"),
            (1234567890123.0, "1.23456789012e+12"),
            (1e20, "1e+20"),
            (0.0001, "0.0001"),
            (0.00001, "1e-05"),
            (-2.5e-7, "-2.5e-07"),
            (999999999999.5, "1e+12"),
            (f64::INFINITY, "inf"),
            (f64::NAN, "nan"),
            (1e-300, "1e-300"),
        ];
        for (x, want) in cases {
            assert_eq!(g12(x), want, "{x}");
        }
    }

    #[test]
    fn json_layout() {
        let j = Json::obj()
            .num("a", 0.5)
            .field("b", Json::nums(&[1.0, f64::NAN]))
            .field("c", Json::Arr(vec![Json::obj().str("k", "v\"").build()]))
            .field("d", Json::Arr(vec![]))
            .build();
        assert_eq!(j.render(), "{\n  \"a\": 0.5,\n  \"b\": [1, null],\n  \"c\": [\n    {\n      \"k\": \"v\\\"\"\n    }\n  ],\n  \"d\": []\n}\n");
    }
}
