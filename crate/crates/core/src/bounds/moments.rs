use super::BoundError;
use crate::linalg::{eig_hermitian, HermitianMatrix};
use crate::math;

use super::tail::PSD_TOL;

/// A moment order `p` accepted by the polynomial moment bounds.
///
/// The bounds are proved for `p = 1` and `p ≥ 1.5`. Orders in `(1, 1.5)`
/// are accepted only through [`MomentOrder::extended`], which switches the
/// BDG constant from `√(2p−1)` to `√(4p−2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentOrder {
    p: f64,
    extended: bool,
}

impl MomentOrder {
    pub fn new(p: f64) -> Result<Self, BoundError> {
        if p == 1.0 || (p >= 1.5 && p.is_finite()) {
            Ok(Self { p, extended: false })
        } else {
            Err(BoundError::InvalidMomentOrder(p))
        }
    }

    /// Like [`MomentOrder::new`] but also admits `1 < p < 1.5`.
    pub fn extended(p: f64) -> Result<Self, BoundError> {
        if p > 1.0 && p < 1.5 {
            Ok(Self { p, extended: true })
        } else {
            Self::new(p)
        }
    }

    pub fn p(self) -> f64 {
        self.p
    }

    pub fn is_extended(self) -> bool {
        self.extended
    }

    /// Squared BDG constant.
    fn bdg_constant_sq(self) -> f64 {
        if self.extended {
            4.0 * self.p - 2.0
        } else {
            2.0 * self.p - 1.0
        }
    }
}

fn nonnegative(name: &'static str, value: f64) -> Result<(), BoundError> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(BoundError::InvalidParameter { name, value, reason: "must be finite and nonnegative" })
    }
}

/// Upper bound on `(E‖X‖_{2p}^{2p})^{1/2p}` from `E‖Δ_X‖_p^p`.
pub fn bdg_bound(order: MomentOrder, delta_moment: f64) -> Result<f64, BoundError> {
    nonnegative("delta_moment", delta_moment)?;
    let p = order.p();
    Ok(math::sqrt(order.bdg_constant_sq()) * math::powf(delta_moment, 1.0 / (2.0 * p)))
}

/// `‖S^{1/2}‖_{2p} = (tr S^p)^{1/2p}` for psd `S`.
fn root_schatten(s: &HermitianMatrix, p: f64) -> Result<f64, BoundError> {
    let e = eig_hermitian(s)?;
    if e.lambda_min() < -PSD_TOL {
        return Err(BoundError::NotPsd { index: 0, eigenvalue: e.lambda_min() });
    }
    let top = e.lambda_max().max(0.0);
    if top == 0.0 {
        return Ok(0.0);
    }
    let acc: f64 = e.eigenvalues().iter().map(|&l| math::powf(l.max(0.0) / top, p)).sum();
    Ok(math::sqrt(top) * math::powf(acc, 1.0 / (2.0 * p)))
}

/// Matrix Khintchine. With `second_moment_sum` absent this is the
/// Rademacher form `√(2p−1)·‖(ΣA_k²)^{1/2}‖_{2p}`; otherwise the general form
/// `√(p−½)·‖(Σ(A_k² + EY_k²))^{1/2}‖_{2p}`.
pub fn khintchine(
    order: MomentOrder,
    coeff_squares_sum: &HermitianMatrix,
    second_moment_sum: Option<&HermitianMatrix>,
) -> Result<f64, BoundError> {
    let p = order.p();
    match second_moment_sum {
        None => Ok(math::sqrt(order.bdg_constant_sq()) * root_schatten(coeff_squares_sum, p)?),
        Some(m) => {
            if m.dim() != coeff_squares_sum.dim() {
                return Err(BoundError::DimensionMismatch { index: 1, expected: coeff_squares_sum.dim(), found: m.dim() });
            }
            root_schatten(m, p).map_err(|e| match e {
                BoundError::NotPsd { eigenvalue, .. } => BoundError::NotPsd { index: 1, eigenvalue },
                other => other,
            })?;
            root_schatten(coeff_squares_sum, p)?;
            let total = coeff_squares_sum + m;
            Ok(math::sqrt(order.bdg_constant_sq() / 2.0) * root_schatten(&total, p)?)
        }
    }
}

/// Rosenthal bound for independent psd summands:
/// `[‖ΣEP_k‖_{2p}^{1/2} + C·(ΣE‖P_k‖_{2p}^{2p})^{1/4p}]²` with `C = √(4p−2)`,
/// or `√(8p−4)` in the extended range.
pub fn rosenthal_psd(order: MomentOrder, mean_norm: f64, summand_moments: f64) -> Result<f64, BoundError> {
    nonnegative("mean_norm", mean_norm)?;
    nonnegative("summand_moments", summand_moments)?;
    let p = order.p();
    let c = math::sqrt(2.0 * order.bdg_constant_sq());
    let root = math::sqrt(mean_norm) + c * math::powf(summand_moments, 1.0 / (4.0 * p));
    Ok(root * root)
}

/// Rosenthal bound for independent centred Hermitian summands at moment
/// order `4p`: `√(4p−1)·variance_norm + (4p−1)·(ΣE‖Y_k‖_{4p}^{4p})^{1/4p}`.
/// In the extended range the second coefficient picks up a factor `√2`.
pub fn rosenthal_hermitian(order: MomentOrder, variance_norm: f64, summand_moments: f64) -> Result<f64, BoundError> {
    nonnegative("variance_norm", variance_norm)?;
    nonnegative("summand_moments", summand_moments)?;
    let p = order.p();
    let q = 4.0 * p - 1.0;
    let second = if order.is_extended() { math::sqrt(2.0) * q } else { q };
    Ok(math::sqrt(q) * variance_norm + second * math::powf(summand_moments, 1.0 / (4.0 * p)))
}
