use alloc::vec::Vec;

use super::{log_dim, BoundError, BoundSet, Provenance, TailLaw};
use crate::linalg::{eig_hermitian, spectral_norm, HermitianMatrix};
use crate::math;

/// Slack allowed when checking that inputs are positive semidefinite.
pub const PSD_TOL: f64 = 1e-10;
/// Slack allowed on the total of a combinatorial array.
pub const ZERO_TOTAL_TOL: f64 = 1e-10;

fn require(cond: bool, name: &'static str, value: f64, reason: &'static str) -> Result<(), BoundError> {
    if cond {
        Ok(())
    } else {
        Err(BoundError::InvalidParameter { name, value, reason })
    }
}

fn require_dim(d: usize) -> Result<(), BoundError> {
    require(d >= 1, "d", d as f64, "dimension must be at least 1")
}

/// Bounds for `Δ_X ⪯ cX + vI`.
pub fn bounded_concentration(c: f64, v: f64, d: usize) -> Result<BoundSet, BoundError> {
    require(c >= 0.0 && c.is_finite(), "c", c, "must be finite and nonnegative")?;
    require(v > 0.0 && v.is_finite(), "v", v, "must be finite and positive")?;
    require_dim(d)?;
    let sub_gaussian = TailLaw::Quadratic { a: 2.0 * v, b: 0.0 };
    let upper = if c == 0.0 { sub_gaussian } else { TailLaw::Poisson { c, v } };
    let ld = log_dim(d);
    Ok(BoundSet {
        provenance: Provenance::BoundedConcentration,
        dim: d,
        upper,
        lower: Some(sub_gaussian),
        mean_upper: math::sqrt(2.0 * v * ld) + c * ld,
        mean_lower: Some(-math::sqrt(2.0 * v * ld)),
    })
}

/// Bounds in terms of `r(ψ)`.
pub fn refined_concentration(r: f64, psi: f64, d: usize) -> Result<BoundSet, BoundError> {
    require(r >= 0.0 && r.is_finite(), "r", r, "must be finite and nonnegative")?;
    require(psi > 0.0 && psi.is_finite(), "psi", psi, "must be finite and positive")?;
    require_dim(d)?;
    let ld = log_dim(d);
    let root_psi = math::sqrt(psi);
    let upper = if r == 0.0 { TailLaw::Vanishing } else { TailLaw::Quadratic { a: 2.0 * r, b: 2.0 / root_psi } };
    let mean_upper = if r == 0.0 { 0.0 } else { math::sqrt(2.0 * r * ld) + ld / root_psi };
    Ok(BoundSet { provenance: Provenance::RefinedConcentration, dim: d, upper, lower: None, mean_upper, mean_lower: None })
}

fn check_psd_family(items: &[HermitianMatrix], offset: usize, d: usize) -> Result<(), BoundError> {
    for (i, m) in items.iter().enumerate() {
        if m.dim() != d {
            return Err(BoundError::DimensionMismatch { index: offset + i, expected: d, found: m.dim() });
        }
        let lmin = eig_hermitian(m)?.lambda_min();
        if lmin < -PSD_TOL {
            return Err(BoundError::NotPsd { index: offset + i, eigenvalue: lmin });
        }
    }
    Ok(())
}

/// Matrix Hoeffding: `σ² = ½‖Σ(A_k² + E Y_k²)‖`. Returns `(σ², bounds)`.
///
/// Matrices are indexed in error messages by their position in the
/// concatenation `bounds_sq ++ second_moments`.
pub fn hoeffding(
    bounds_sq: &[HermitianMatrix],
    second_moments: &[HermitianMatrix],
) -> Result<(f64, BoundSet), BoundError> {
    let d = bounds_sq.first().or(second_moments.first()).ok_or(BoundError::EmptyInput)?.dim();
    check_psd_family(bounds_sq, 0, d)?;
    check_psd_family(second_moments, bounds_sq.len(), d)?;
    let total = HermitianMatrix::sum(d, bounds_sq.iter().chain(second_moments));
    let sigma2 = 0.5 * spectral_norm(&total)?;
    let set = if sigma2 == 0.0 {
        BoundSet {
            provenance: Provenance::Hoeffding,
            dim: d,
            upper: TailLaw::Vanishing,
            lower: Some(TailLaw::Vanishing),
            mean_upper: 0.0,
            mean_lower: Some(0.0),
        }
    } else {
        BoundSet { provenance: Provenance::Hoeffding, ..bounded_concentration(0.0, sigma2, d)? }
    };
    Ok((sigma2, set))
}

/// Matrix Bernstein for summands with `‖Y_k‖ ≤ R` and variance proxy `σ²`.
///
/// `σ² = 0` forces every summand to vanish, so the degenerate law applies and
/// `R` is not consulted.
pub fn bernstein(sigma2: f64, r: f64, d: usize) -> Result<BoundSet, BoundError> {
    bernstein_with(Provenance::Bernstein, sigma2, r, d)
}

fn bernstein_with(provenance: Provenance, sigma2: f64, r: f64, d: usize) -> Result<BoundSet, BoundError> {
    require(sigma2 >= 0.0 && sigma2.is_finite(), "sigma2", sigma2, "must be finite and nonnegative")?;
    require_dim(d)?;
    if sigma2 == 0.0 {
        return Ok(BoundSet { provenance, dim: d, upper: TailLaw::Vanishing, lower: None, mean_upper: 0.0, mean_lower: None });
    }
    require(r > 0.0 && r.is_finite(), "R", r, "must be finite and positive")?;
    let ld = log_dim(d);
    Ok(BoundSet {
        provenance,
        dim: d,
        upper: TailLaw::Quadratic { a: 3.0 * sigma2, b: 2.0 * r },
        lower: None,
        mean_upper: math::sqrt(3.0 * sigma2 * ld) + r * ld,
        mean_lower: None,
    })
}

/// Bernstein bound for `‖Σ Z_k‖` with rectangular `d1 × d2` summands.
pub fn rectangular_bernstein(row_var: f64, col_var: f64, r: f64, d1: usize, d2: usize) -> Result<BoundSet, BoundError> {
    require(row_var >= 0.0, "row_var", row_var, "must be nonnegative")?;
    require(col_var >= 0.0, "col_var", col_var, "must be nonnegative")?;
    require_dim(d1)?;
    require_dim(d2)?;
    bernstein_with(Provenance::RectangularBernstein, row_var.max(col_var), r, d1 + d2)
}

/// Scalar summaries of a combinatorial array.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinatorialSummary {
    pub n: usize,
    pub sigma2: f64,
    pub r: f64,
    pub bounds: BoundSet,
}

/// Bernstein bound for `Σ_j A_{jπ(j)}` over a uniform permutation, for a
/// square array with zero total. The dimension is read off the entries.
pub fn combinatorial_bernstein(array: &[Vec<HermitianMatrix>]) -> Result<CombinatorialSummary, BoundError> {
    let n = array.len();
    let d = array.first().and_then(|row| row.first()).ok_or(BoundError::EmptyInput)?.dim();
    for (j, row) in array.iter().enumerate() {
        if row.len() != n {
            return Err(BoundError::Ragged { row: j, expected: n, found: row.len() });
        }
        for (k, m) in row.iter().enumerate() {
            if m.dim() != d {
                return Err(BoundError::DimensionMismatch { index: j * n + k, expected: d, found: m.dim() });
            }
        }
    }
    let total = HermitianMatrix::sum(d, array.iter().flatten());
    let residual = total.max_abs();
    if residual > ZERO_TOTAL_TOL {
        return Err(BoundError::NonzeroTotal(residual));
    }
    let squares: Vec<HermitianMatrix> = array.iter().flatten().map(HermitianMatrix::square).collect();
    let sigma2 = spectral_norm(&HermitianMatrix::sum(d, &squares))? / n as f64;
    let mut r: f64 = 0.0;
    for m in array.iter().flatten() {
        r = r.max(spectral_norm(m)?);
    }
    let ld = log_dim(d);
    let bounds = if sigma2 == 0.0 {
        BoundSet { provenance: Provenance::CombinatorialBernstein, dim: d, upper: TailLaw::Vanishing, lower: None, mean_upper: 0.0, mean_lower: None }
    } else {
        let root2 = math::sqrt(2.0);
        BoundSet {
            provenance: Provenance::CombinatorialBernstein,
            dim: d,
            upper: TailLaw::Quadratic { a: 12.0 * sigma2, b: 4.0 * root2 * r },
            lower: None,
            mean_upper: math::sqrt(12.0 * sigma2 * ld) + 2.0 * root2 * r * ld,
            mean_lower: None,
        }
    };
    Ok(CombinatorialSummary { n, sigma2, r, bounds })
}

/// Bounded differences for a self-reproducing function with parameter `s`
/// and `L = ‖Σ A_k²‖`.
pub fn bounded_differences(s: f64, l: f64, d: usize) -> Result<BoundSet, BoundError> {
    require(s > 0.0 && s.is_finite(), "s", s, "must be finite and positive")?;
    require(l >= 0.0 && l.is_finite(), "L", l, "must be finite and nonnegative")?;
    require_dim(d)?;
    let (upper, mean_upper) = if l == 0.0 {
        (TailLaw::Vanishing, 0.0)
    } else {
        (TailLaw::Quadratic { a: l / s, b: 0.0 }, math::sqrt(l * log_dim(d) / s))
    };
    Ok(BoundSet { provenance: Provenance::BoundedDifferences, dim: d, upper, lower: None, mean_upper, mean_lower: None })
}

/// Markov bound on `P(‖X‖ ≥ t)` from Schatten moments, given as
/// `(p, E‖X‖_p^p)` pairs.
pub fn chebyshev_tail(moments: &[(f64, f64)], t: f64) -> Result<f64, BoundError> {
    require(t > 0.0, "t", t, "must be positive")?;
    if moments.is_empty() {
        return Err(BoundError::EmptyInput);
    }
    let mut best = f64::INFINITY;
    for &(p, m) in moments {
        require(p >= 1.0, "p", p, "moment order must be at least 1")?;
        require(m >= 0.0, "moment", m, "must be nonnegative")?;
        best = best.min(m * math::powf(t, -p));
    }
    Ok(best.min(1.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_form_is_tighter_here() {
        let b = bounded_concentration(1.0, 1.0, 1).unwrap();
        let two_over_e = 2.0 / core::f64::consts::E;
        assert!((b.tail_upper(1.0).unwrap() - two_over_e).abs() < 1e-15);
        assert!(two_over_e <= math::exp(-0.25));
    }

    #[test]
    fn threshold_zero_clamps_to_one() {
        for (c, v, d) in [(0.0, 1.0, 1), (2.0, 0.5, 7), (1.0, 3.0, 2)] {
            let b = bounded_concentration(c, v, d).unwrap();
            assert_eq!(b.tail_upper(0.0).unwrap(), 1.0);
            assert_eq!(b.tail_upper_raw(0.0).unwrap(), d as f64);
        }
        assert!(bounded_concentration(0.0, 1.0, 1).unwrap().tail_upper(-1.0).is_err());
        assert!(bounded_concentration(0.0, 0.0, 1).is_err());
    }

    #[test]
    fn bernstein_matches_refined_at_inverse_r_squared() {
        let b = bernstein(10.0, 1.0, 2).unwrap();
        let r = refined_concentration(15.0, 1.0, 2).unwrap();
        assert_eq!(b.upper, r.upper);
        assert!((b.mean_upper - 5.253_236_589_420_078).abs() < 1e-12);
    }

    #[test]
    fn degenerate_inputs_vanish() {
        let (s2, b) = hoeffding(&[HermitianMatrix::zeros(2)], &[]).unwrap();
        assert_eq!(s2, 0.0);
        assert_eq!(b.tail_upper(1e-9).unwrap(), 0.0);
        assert_eq!(b.tail_upper(0.0).unwrap(), 1.0);
        let rb = rectangular_bernstein(0.0, 0.0, 0.0, 1, 2).unwrap();
        assert_eq!(rb.tail_upper(3.0).unwrap(), 0.0);
        let zero = alloc::vec![alloc::vec![HermitianMatrix::zeros(1); 3]; 3];
        let cs = combinatorial_bernstein(&zero).unwrap();
        assert_eq!((cs.sigma2, cs.r), (0.0, 0.0));
        assert_eq!(cs.bounds.tail_upper(1.0).unwrap(), 0.0);
    }

    #[test]
    fn hoeffding_rejects_bad_input() {
        let neg = HermitianMatrix::diag(&[1.0, -1.0]);
        assert!(matches!(hoeffding(&[neg], &[]), Err(BoundError::NotPsd { index: 0, .. })));
        let mixed = [HermitianMatrix::identity(2), HermitianMatrix::identity(3)];
        assert!(matches!(hoeffding(&mixed, &[]), Err(BoundError::DimensionMismatch { index: 1, .. })));
        assert_eq!(hoeffding(&[], &[]), Err(BoundError::EmptyInput));
    }

    #[test]
    fn combinatorial_rejects_bad_arrays() {
        let one = HermitianMatrix::identity(1);
        let ragged = alloc::vec![alloc::vec![one.clone(), one.clone()], alloc::vec![one.clone()]];
        assert!(matches!(combinatorial_bernstein(&ragged), Err(BoundError::Ragged { row: 1, .. })));
        let nonzero = alloc::vec![alloc::vec![one.clone(); 2]; 2];
        assert!(matches!(combinatorial_bernstein(&nonzero), Err(BoundError::NonzeroTotal(_))));
    }

    #[test]
    fn chebyshev_shapes() {
        let moments: Vec<(f64, f64)> = (1..=10).map(|p| (p as f64, 2.0)).collect();
        assert!((chebyshev_tail(&moments, 2.0).unwrap() - 2.0 / 1024.0).abs() < 1e-15);
        assert_eq!(chebyshev_tail(&moments, 0.5).unwrap(), 1.0);
        assert_eq!(chebyshev_tail(&[(2.0, 0.5)], 2.0).unwrap(), 0.125);
        assert!(chebyshev_tail(&moments, 0.0).is_err());
    }
}
