use alloc::vec::Vec;

use super::BoundError;
use crate::math;

/// Grid size for each pass of [`laplace_bound`].
pub const LAPLACE_GRID_POINTS: usize = 200;

/// Bound on `log m(θ)` when `Δ_X ⪯ cX + vI`, in its sharper logarithmic form
/// for `0 < θ < 1/c`.
pub fn mgf_bound_bounded(c: f64, v: f64, theta: f64) -> Result<f64, BoundError> {
    check_cv(c, v)?;
    if theta <= 0.0 || c == 0.0 {
        return Ok(v * theta * theta / 2.0);
    }
    let x = c * theta;
    if x >= 1.0 {
        return Err(BoundError::OutsideMgfDomain { theta, limit: 1.0 / c });
    }
    // −log(1 − x) − x, by its series where the closed form cancels.
    let g = if x < 1e-3 {
        let mut term = x * x;
        let mut acc = 0.0;
        for k in 2..12 {
            acc += term / k as f64;
            term *= x;
        }
        acc
    } else {
        -math::ln_1p(-x) - x
    };
    Ok(v / (c * c) * g)
}

/// The looser rational form `vθ² / (2(1 − cθ))`.
pub fn mgf_bound_bounded_loose(c: f64, v: f64, theta: f64) -> Result<f64, BoundError> {
    check_cv(c, v)?;
    if theta <= 0.0 {
        return Ok(v * theta * theta / 2.0);
    }
    if c * theta >= 1.0 {
        return Err(BoundError::OutsideMgfDomain { theta, limit: 1.0 / c });
    }
    Ok(v * theta * theta / (2.0 * (1.0 - c * theta)))
}

fn check_cv(c: f64, v: f64) -> Result<(), BoundError> {
    if !(c >= 0.0) {
        return Err(BoundError::InvalidParameter { name: "c", value: c, reason: "must be nonnegative" });
    }
    if !(v >= 0.0) {
        return Err(BoundError::InvalidParameter { name: "v", value: v, reason: "must be nonnegative" });
    }
    Ok(())
}

/// `rθ² / (2(1 − θ²/ψ))` for `0 ≤ θ < √ψ`. Values past `1e308` come back as
/// `+∞`.
pub fn mgf_bound_refined(r: f64, psi: f64, theta: f64) -> Result<f64, BoundError> {
    if !(r >= 0.0) {
        return Err(BoundError::InvalidParameter { name: "r", value: r, reason: "must be nonnegative" });
    }
    if !(psi > 0.0) {
        return Err(BoundError::InvalidParameter { name: "psi", value: psi, reason: "must be positive" });
    }
    let limit = math::sqrt(psi);
    if !(theta >= 0.0) || theta >= limit {
        return Err(BoundError::OutsideMgfDomain { theta, limit });
    }
    let value = r * theta * theta / (2.0 * (1.0 - theta * theta / psi));
    Ok(if value > 1e308 { f64::INFINITY } else { value })
}

/// Minimizer of `−θt + rθ²/(2(1 − θ²/ψ))`, written so that small `t` does
/// not cancel.
pub fn theta_star(t: f64, psi: f64, r: f64) -> Result<f64, BoundError> {
    for (name, value) in [("t", t), ("psi", psi), ("r", r)] {
        if !(value > 0.0 && value.is_finite()) {
            return Err(BoundError::InvalidParameter { name, value, reason: "must be finite and positive" });
        }
    }
    let u = 4.0 * t * t / (psi * r * r);
    Ok((2.0 * t / r) / (1.0 + math::sqrt(1.0 + u)))
}

/// Which Laplace-transform bound to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaplaceSide {
    /// `P(λ_max ≥ t) ≤ inf_{θ>0} d·exp(−θt + log m(θ))`.
    UpperTail,
    /// `P(λ_min ≤ −t) ≤ inf_{θ<0} d·exp(θt + log m(θ))`.
    LowerTail,
    /// `E λ_max ≤ inf_{θ>0} (log d + log m(θ)) / θ`.
    UpperMean,
    /// `E λ_min ≥ sup_{θ<0} (log d + log m(θ)) / θ`.
    LowerMean,
}

impl LaplaceSide {
    fn sign(self) -> f64 {
        match self {
            LaplaceSide::UpperTail | LaplaceSide::UpperMean => 1.0,
            LaplaceSide::LowerTail | LaplaceSide::LowerMean => -1.0,
        }
    }
}

/// Range of `|θ|` searched by [`laplace_bound`]; the sign comes from the
/// side.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaRange {
    pub min: f64,
    pub max: f64,
}

/// Numerical Laplace-transform bound from a bound on `log m(θ)`.
///
/// Searches a logarithmic grid of [`LAPLACE_GRID_POINTS`] magnitudes over
/// `range`, then a second grid between the neighbours of the best point.
/// A `closed_form` optimizer, if supplied, is evaluated as one more
/// candidate. Tail values are clamped to `[0, 1]`; mean values are not.
pub fn laplace_bound<F: Fn(f64) -> f64>(
    log_m: F,
    range: ThetaRange,
    d: usize,
    t: f64,
    side: LaplaceSide,
    closed_form: Option<f64>,
) -> Result<f64, BoundError> {
    if !(range.min > 0.0 && range.max > range.min && range.max.is_finite()) {
        return Err(BoundError::EmptyThetaRange { min: range.min, max: range.max });
    }
    if d == 0 {
        return Err(BoundError::InvalidParameter { name: "d", value: 0.0, reason: "dimension must be at least 1" });
    }
    let sign = side.sign();
    let ld = math::ln(d as f64);
    // Quantity to minimise, as a function of |θ|. Tails are handled on the
    // log scale.
    let objective = |mag: f64| -> Result<f64, BoundError> {
        let theta = sign * mag;
        let lm = log_m(theta);
        if !lm.is_finite() {
            return Err(BoundError::NonFiniteCurve(theta));
        }
        Ok(match side {
            LaplaceSide::UpperTail | LaplaceSide::LowerTail => ld - mag * t + lm,
            LaplaceSide::UpperMean | LaplaceSide::LowerMean => (ld + lm) / mag,
        })
    };

    let (lo, hi) = (math::ln(range.min), math::ln(range.max));
    let grid = |a: f64, b: f64| -> Vec<f64> {
        let m = LAPLACE_GRID_POINTS - 1;
        (0..=m).map(|i| math::exp(a + (b - a) * i as f64 / m as f64)).collect()
    };
    let coarse = grid(lo, hi);
    let mut values = Vec::with_capacity(coarse.len());
    for &mag in &coarse {
        values.push(objective(mag)?);
    }
    let best_idx = argmin(&values);
    let mut best = values[best_idx];
    let left = coarse[best_idx.saturating_sub(1)];
    let right = coarse[(best_idx + 1).min(coarse.len() - 1)];
    for mag in grid(math::ln(left), math::ln(right)) {
        best = best.min(objective(mag)?);
    }
    if let Some(theta) = closed_form {
        let mag = theta * sign;
        if mag > 0.0 && mag.is_finite() {
            best = best.min(objective(mag)?);
        }
    }
    Ok(match side {
        LaplaceSide::UpperTail | LaplaceSide::LowerTail => math::exp(best).clamp(0.0, 1.0),
        LaplaceSide::UpperMean => best,
        LaplaceSide::LowerMean => -best,
    })
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if *v < values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_mgf_examples() {
        assert_eq!(mgf_bound_bounded(0.0, 1.0, -1.0).unwrap(), 0.5);
        let tight = mgf_bound_bounded(1.0, 1.0, 0.5).unwrap();
        let loose = mgf_bound_bounded_loose(1.0, 1.0, 0.5).unwrap();
        assert!((tight - (core::f64::consts::LN_2 - 0.5)).abs() < 1e-15);
        assert_eq!(loose, 0.25);
        assert!(tight <= loose);
        assert_eq!(mgf_bound_bounded(1.0, 1.0, 0.0).unwrap(), 0.0);
        assert!(mgf_bound_bounded(2.0, 1.0, 0.5).is_err());
    }

    #[test]
    fn series_branch_is_continuous() {
        let below = mgf_bound_bounded(1.0, 1.0, 0.999_999e-3).unwrap();
        let above = mgf_bound_bounded(1.0, 1.0, 1.000_001e-3).unwrap();
        assert!((above - below).abs() / below < 1e-5);
        let tiny = mgf_bound_bounded(1.0, 1.0, 1e-9).unwrap();
        assert!((tiny / 0.5e-18 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn refined_mgf_examples() {
        assert!((mgf_bound_refined(1.0, 1.0, 0.5).unwrap() - 0.125 / 0.75).abs() < 1e-15);
        assert_eq!(mgf_bound_refined(1.0, 1.0, 0.0).unwrap(), 0.0);
        assert!(mgf_bound_refined(1.0, 1.0, 1.0).is_err());
        assert_eq!(mgf_bound_refined(1e300, 1.0, 1.0 - 1e-12).unwrap(), f64::INFINITY);
    }

    #[test]
    fn theta_star_examples() {
        let t = 2f64.sqrt();
        assert!((theta_star(t, 1.0, 1.0).unwrap() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((theta_star(1e-6, 1.0, 1.0).unwrap() - 1e-6).abs() < 1e-9);
        assert!(theta_star(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn laplace_lower_tail_and_upper_mean() {
        let curve = |th: f64| th * th / 2.0;
        let range = ThetaRange { min: 1e-6, max: 1e3 };
        let lower = laplace_bound(curve, range, 1, 1.0, LaplaceSide::LowerTail, Some(-1.0)).unwrap();
        assert!((lower - (-0.5f64).exp()).abs() < 1e-12);
        let mean = laplace_bound(
            |th| mgf_bound_bounded(0.0, 10.0, th).unwrap(),
            range,
            2,
            0.0,
            LaplaceSide::UpperMean,
            None,
        )
        .unwrap();
        assert!((mean - (20.0 * core::f64::consts::LN_2).sqrt()).abs() < 1e-6);
        let at_zero = laplace_bound(curve, range, 3, 0.0, LaplaceSide::UpperTail, None).unwrap();
        assert_eq!(at_zero, 1.0);
        assert!(laplace_bound(curve, ThetaRange { min: 1.0, max: 1.0 }, 1, 1.0, LaplaceSide::UpperTail, None).is_err());
    }
}
