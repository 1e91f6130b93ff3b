use mcx_core::bounds::{bernstein, refined_concentration, theta_star};
use mcx_core::linalg::{eig_hermitian, expm, hermitian_dilation, lambda_max, spectral_norm, traces};
use mcx_core::{Complex64, Ensemble, EnsembleSpec, GeneralMatrix, HermitianMatrix, SteinPairModel};
use proptest::prelude::*;

fn hermitian(max_dim: usize) -> impl Strategy<Value = HermitianMatrix> {
    (1..=max_dim).prop_flat_map(|d| {
        prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), d * d).prop_map(move |raw| {
            let mut data = vec![Complex64::new(0.0, 0.0); d * d];
            for i in 0..d {
                for j in i..d {
                    let (re, im) = raw[i * d + j];
                    let im = if i == j { 0.0 } else { im };
                    data[i * d + j] = Complex64::new(re, im);
                    data[j * d + i] = Complex64::new(re, -im);
                }
            }
            HermitianMatrix::new(d, data).unwrap()
        })
    })
}

fn general() -> impl Strategy<Value = GeneralMatrix> {
    (1usize..=4, 1usize..=4).prop_flat_map(|(r, c)| {
        prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), r * c).prop_map(move |raw| {
            GeneralMatrix::new(r, c, raw.into_iter().map(|(a, b)| Complex64::new(a, b)).collect()).unwrap()
        })
    })
}

fn series() -> impl Strategy<Value = Vec<HermitianMatrix>> {
    (1usize..=3).prop_flat_map(|d| prop::collection::vec(hermitian(d).prop_filter("fixed dim", move |a| a.dim() == d), 1..=6))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn eigendecomposition_reconstructs(a in hermitian(6)) {
        let e = eig_hermitian(&a).unwrap();
        let scale = a.max_abs().max(1.0);
        prop_assert!(e.reconstruct().max_abs_diff(&a) <= 1e-12 * scale);
        prop_assert!(e.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        let (tr, _) = traces(&a);
        let sum: f64 = e.eigenvalues().iter().sum();
        prop_assert!((sum - tr).abs() <= 1e-12 * scale * a.dim() as f64);
    }

    #[test]
    fn exponential_inverts(a in hermitian(5)) {
        let prod = expm(&a).unwrap().mul(&expm(&-&a).unwrap());
        let id = GeneralMatrix::identity(a.dim());
        let growth = (2.0 * spectral_norm(&a).unwrap()).exp();
        prop_assert!(prod.max_abs_diff(&id) <= 1e-12 * growth);
    }

    #[test]
    fn dilation_keeps_spectral_norm(b in general()) {
        let h = hermitian_dilation(&b);
        let top = lambda_max(&h).unwrap();
        let norm = spectral_norm(&b).unwrap();
        prop_assert!((top - norm).abs() <= 1e-12 * norm.max(1.0));
    }

    #[test]
    fn bernstein_is_refined_special_case(sigma2 in 1e-3f64..1e3, r in 1e-2f64..1e2, d in 1usize..100, t in 0.0f64..1e3) {
        let b = bernstein(sigma2, r, d).unwrap();
        let g = refined_concentration(1.5 * sigma2, 1.0 / (r * r), d).unwrap();
        let (x, y) = (b.tail_upper_raw(t).unwrap(), g.tail_upper_raw(t).unwrap());
        prop_assert!((x - y).abs() <= 1e-12 * x.max(y));
        prop_assert!((b.mean_upper - g.mean_upper).abs() <= 1e-12 * b.mean_upper);
    }

    #[test]
    fn tails_are_monotone_probabilities(sigma2 in 1e-3f64..1e3, r in 1e-2f64..1e2, d in 1usize..100, t in 0.0f64..1e3, dt in 0.0f64..10.0) {
        let b = bernstein(sigma2, r, d).unwrap();
        let (p, q) = (b.tail_upper(t).unwrap(), b.tail_upper(t + dt).unwrap());
        prop_assert!((0.0..=1.0).contains(&p) && q <= p);
    }

    #[test]
    fn theta_star_plugs_back(lpsi in -4.0f64..4.0, lr in -4.0f64..4.0, lt in -3.0f64..3.0) {
        let (psi, r) = (10f64.powf(lpsi), 10f64.powf(lr));
        let t = r * psi.sqrt() * 10f64.powf(lt);
        let th = theta_star(t, psi, r).unwrap();
        prop_assert!(th > 0.0 && th < psi.sqrt());
        prop_assert!((r * th / (1.0 - th * th / psi) - t).abs() <= 1e-10 * t);
    }

    #[test]
    fn series_is_a_stein_pair(coefficients in series()) {
        let e = Ensemble::new(EnsembleSpec::RademacherSeries { coefficients }).unwrap();
        let model = SteinPairModel::new(e.clone());
        let table = e.enumerate_default().unwrap();
        let scale = table.entries().iter().map(|o| o.x.max_abs()).fold(1.0, f64::max);
        for o in table.entries() {
            prop_assert!(model.stein_residual(&o.state).unwrap() <= 1e-10 * scale);
        }
        // E Δ_X = E X².
        let mean_delta = table.matrix_expectation(|o| model.conditional_variance(&o.state).unwrap());
        let mean_sq = table.matrix_expectation(|o| o.x.square());
        prop_assert!(mean_delta.max_abs_diff(&mean_sq) <= 1e-10 * scale * scale);
    }
}
