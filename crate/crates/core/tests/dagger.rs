mod common;

use std::f64::consts::PI;

use fpt_core::cbf::{brownian, catalog, make_compound_poisson_laplace, make_relativistic, make_stable, ProcessSpec};
use fpt_core::dagger::{
    dagger, dagger_complex, duality_residual, psi_lambda, psi_lambda_dagger, psi_lambda_dagger_imaginary,
    sandwich_factor, PsiLambda,
};
use fpt_core::spectral::phase_shift;
use fpt_core::FptError;
use num_complex::Complex64;
use proptest::prelude::*;

/// `log ψ†(ξ) = (1/π)∫₀^∞ ξ log ψ(s²)/(ξ² + s²) ds` by an exp–sinh sum.
fn dagger_oracle(spec: &ProcessSpec, xi: f64) -> f64 {
    (common::exp_sinh(|s| xi * spec.eval(s * s).ln() / (xi * xi + s * s), 0.0) / PI).exp()
}

#[test]
fn closed_forms() {
    for alpha in [0.5, 1.0, 1.5] {
        let s = make_stable(alpha).unwrap();
        for xi in [0.01, 1.0, 30.0] {
            let d = dagger(&s, xi, 1e-12).unwrap();
            assert!(d.contains(xi.powf(alpha / 2.0)), "alpha={alpha} xi={xi}: {d}");
        }
    }
    let b = brownian();
    assert!(dagger(&b, 2.5, 1e-12).unwrap().contains(2.5));
    let cpl = make_compound_poisson_laplace();
    for xi in [0.1, 1.0, 10.0] {
        assert!(dagger(&cpl, xi, 1e-12).unwrap().contains(xi / (1.0 + xi)));
    }
}

#[test]
fn agrees_with_the_direct_poisson_integral() {
    for spec in catalog() {
        for xi in [0.3, 1.0, 4.0] {
            let d = dagger(&spec, xi, 1e-10).unwrap();
            let o = dagger_oracle(&spec, xi);
            assert!((d.mid() - o).abs() <= 1e-8 * o + d.width(), "{spec} xi={xi}: {d} vs {o}");
        }
    }
}

#[test]
fn sandwich_constant() {
    let c = 0.915_965_594_177_219_015;
    assert!((sandwich_factor() - (2.0 * c / PI).exp()).abs() < 1e-15);
}

#[test]
fn complex_dagger_on_the_real_axis() {
    let s = make_stable(1.0).unwrap();
    let z = dagger_complex(&s, Complex64::new(2.0, 0.0), 1e-10).unwrap();
    assert!(z.contains(Complex64::new(2f64.sqrt(), 0.0)), "{z:?}");
    assert!(dagger_complex(&s, Complex64::new(-1.0, 0.0), 1e-8).is_err());
}

#[test]
fn factorisation_identity() {
    for spec in [make_stable(1.0).unwrap(), make_stable(1.5).unwrap(), make_relativistic(1.0, 1.0).unwrap()] {
        for z in [Complex64::new(0.0, 1.0), Complex64::new(1.0, 1.0), Complex64::new(-0.5, 2.0)] {
            let r = duality_residual(&spec, z, 1e-9).unwrap();
            assert!(r.contains(0.0) && r.width() <= 1e-6, "{spec} z={z}: {r}");
        }
    }
    // the boundary measure of ξ/(1+ξ) is a point mass
    let cpl = make_compound_poisson_laplace();
    assert!(matches!(duality_residual(&cpl, Complex64::new(0.0, 1.0), 1e-9), Err(FptError::Unsupported(_))));
}

#[test]
fn imaginary_point_polar_form() {
    let s = make_stable(1.0).unwrap();
    let p = psi_lambda_dagger_imaginary(&s, 2.0, 1e-10).unwrap();
    // ψ_λ(λ²) = ψ(λ²)/(λ²ψ'(λ²)) = 2 for ψ(ξ) = √ξ
    assert!((p.modulus.mid() - 2f64.sqrt()).abs() < 1e-14);
    assert!(p.argument.contains(PI / 8.0));
    assert_eq!(p.argument, phase_shift(&s, 2.0, 1e-10).unwrap());
}

#[test]
fn psi_lambda_values() {
    let s = make_stable(1.0).unwrap();
    // ψ_λ(ξ) = (1 − ξ/λ²)/(1 − √ξ/λ) = 1 + √ξ/λ
    for (l, xi) in [(1.0, 4.0), (2.0, 0.25), (0.5, 9.0)] {
        let want = 1.0 + f64::sqrt(xi) / l;
        assert!((psi_lambda(&s, l, xi) - want).abs() < 1e-13 * want);
    }
    let pl = PsiLambda::new(&s, 3.0);
    assert_eq!(pl.eval(0.0), 1.0);
    assert!((pl.diagonal() - 2.0).abs() < 1e-14);
    for h in [1e-9f64, 1e-5, 1e-3, 0.02] {
        let want = 1.0 + f64::sqrt(9.0 * (1.0 + h)) / 3.0;
        assert!((pl.eval(9.0 * (1.0 + h)) - want).abs() < 1e-12, "h={h}");
    }
}

#[test]
fn psi_lambda_dagger_stable() {
    // 1 + √ξ/λ is the Bernstein function of a drift plus a stable part; its
    // dagger equals the direct Poisson integral of its logarithm
    let s = make_stable(1.0).unwrap();
    let d = psi_lambda_dagger(&s, 1.0, 2.0, 1e-10).unwrap();
    let o = (common::exp_sinh(|u| 2.0 * (1.0 + u).ln() / (4.0 + u * u), 0.0) / PI).exp();
    assert!((d.mid() - o).abs() <= 1e-9 * o + d.width(), "{d} vs {o}");
}

fn spec_index() -> impl Strategy<Value = usize> {
    0..catalog().len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dagger_sandwich(i in spec_index(), u in -3.0f64..3.0) {
        let spec = &catalog()[i];
        let xi = 10f64.powf(u);
        let d = dagger(spec, xi, 1e-8).unwrap();
        let r = spec.eval(xi * xi).sqrt();
        let s = sandwich_factor();
        prop_assert!(d.lo >= r / s && d.hi <= r * s, "{spec} xi={xi}: {d} vs {r}");
    }

    #[test]
    fn psi_lambda_is_increasing(i in spec_index(), ul in -2.0f64..2.0, u in -4.0f64..4.0, r in 1.001f64..3.0) {
        let spec = &catalog()[i];
        let (l, a) = (10f64.powf(ul), 10f64.powf(u));
        let (p, q) = (psi_lambda(spec, l, a), psi_lambda(spec, l, a * r));
        prop_assert!(p > 0.0 && q >= p * (1.0 - 1e-9), "{spec} l={l}: {p} {q}");
    }

    #[test]
    fn psi_lambda_ratio_estimate(i in spec_index(), ul in -2.0f64..2.0, u in -2.0f64..2.0) {
        let spec = &catalog()[i];
        let (l, xi) = (10f64.powf(ul), 10f64.powf(u));
        let l2 = l * l;
        let x2 = xi * xi;
        prop_assume!((x2 / l2 - 1.0).abs() > 0.05);
        let lhs = psi_lambda(spec, l, x2) / psi_lambda(spec, l, l2);
        let rhs = spec.deriv1(l2) * l2.max(x2) / spec.difference(l2, x2).abs();
        prop_assert!(lhs <= rhs * (1.0 + 1e-9), "{spec}: {lhs} > {rhs}");
    }
}
