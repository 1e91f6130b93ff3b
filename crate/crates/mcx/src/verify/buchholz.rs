//! Comparison of the Khintchine constant with the optimal one:
//! `(2p−1)^p < e^{p−1/2} (2p−1)!!` for integer `p`.
//!
//! Both sides are squared so only the integer power `e^{2p−1}` appears, and
//! that is bounded below by a partial sum of its Taylor series. The check is
//! carried out in exact rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq)]
pub struct BuchholzRow {
    pub p: u32,
    /// `(2p−1)^p`.
    pub power: BigInt,
    /// `(2p−1)!!`.
    pub double_factorial: BigInt,
    /// Certified lower bound on `e^{p−1/2} (2p−1)!! / (2p−1)^p`.
    pub ratio_lower: f64,
    /// The same ratio in double precision.
    pub ratio_f64: f64,
    /// The rational lower bound alone exceeds 1.
    pub proven: bool,
}

fn double_factorial(m: u32) -> BigInt {
    (1..=m).rev().step_by(2).fold(BigInt::one(), |acc, k| acc * k)
}

/// `Σ_{k=0}^{terms} x^k / k!` for a nonnegative integer `x`.
fn exp_partial_sum(x: u32, terms: u32) -> BigRational {
    let mut sum = BigRational::zero();
    let mut term = BigRational::one();
    for k in 0..=terms {
        if k > 0 {
            term = term * BigRational::new(BigInt::from(x), BigInt::from(k));
        }
        sum += &term;
    }
    sum
}

pub fn buchholz_row(p: u32) -> BuchholzRow {
    assert!(p >= 1, "p must be at least 1");
    let m = 2 * p - 1;
    let power = BigInt::from(m).pow(p);
    let df = double_factorial(m);
    // Taylor terms of e^m peak near k = m; past 4m + 20 they are negligible.
    let e_lower = exp_partial_sum(m, 4 * m + 20);
    let lhs = BigRational::from_integer(power.pow(2));
    let rhs = e_lower * BigRational::from_integer(&df * &df);
    let proven = lhs < rhs;
    let ratio_sq = (rhs / lhs).to_f64().unwrap_or(f64::INFINITY);
    let ratio_f64 = (f64::from(p) - 0.5).exp() * df.to_f64().unwrap_or(f64::INFINITY) / power.to_f64().unwrap_or(f64::INFINITY);
    BuchholzRow { p, power, double_factorial: df, ratio_lower: ratio_sq.sqrt(), ratio_f64, proven }
}

pub fn buchholz_table(max_p: u32) -> Vec<BuchholzRow> {
    (1..=max_p).map(buchholz_row).collect()
}
