mod common;

use std::f64::consts::{E, FRAC_PI_2, PI};

use fpt_core::cbf::{brownian, make_compound_poisson_laplace, make_geometric_stable, make_stable};
use fpt_core::error::ConditionFailure;
use fpt_core::passage::{
    asymptotic_t, asymptotic_x, c1, c2, estimate_band, incomplete_gamma_lower, incomplete_gamma_upper, survival,
    tail_bound, Survival, SurvivalRequest,
};
use fpt_core::FptError;
use proptest::prelude::*;

use common::{brownian_density, brownian_survival, erf};

const CATALAN: f64 = 0.915_965_594_177_219_015;

fn request(spec: fpt_core::ProcessSpec, x: f64, t: f64, n: u32) -> SurvivalRequest {
    SurvivalRequest { spec, x, t, n, tol: 1e-8, t0: None }
}

#[test]
fn brownian_closed_forms() {
    let s = Survival::new(&brownian(), 0.5).unwrap();
    for (x, t) in [(0.5, 0.1), (1.0, 1.0), (2.0, 0.3), (3.0, 10.0)] {
        let p = s.eval(x, t, 0, 1e-8, None).unwrap();
        assert!(p.value.contains(brownian_survival(x, t)) && p.value.width() <= 1e-7, "{x} {t}: {}", p.value);
        let d = s.eval(x, t, 1, 1e-8, None).unwrap();
        assert!(d.value.contains(brownian_density(x, t)), "{x} {t}: {}", d.value);
        // second derivative: f(t)(3/(2t) − x²/(4t²))
        let f2 = brownian_density(x, t) * (1.5 / t - x * x / (4.0 * t * t));
        let d2 = s.eval(x, t, 2, 1e-8, None).unwrap();
        assert!(d2.value.contains(f2), "{x} {t}: {} vs {f2}", d2.value);
        assert!(p.cond_a1 && p.cond_a2.is_none());
    }
}

#[test]
fn oracle_erf_matches_reference_values() {
    assert!((erf(1.0) - 0.842_700_792_949_714_9).abs() < 1e-15);
    assert!((erf(0.1) - 0.112_462_916_018_284_9).abs() < 1e-16);
    assert!((1.0 - erf(3.0) - 2.209_049_699_858_544e-5).abs() < 1e-16);
}

#[test]
fn compound_poisson_is_rejected() {
    let e = survival(&request(make_compound_poisson_laplace(), 1.0, 1.0, 0)).unwrap_err();
    match e.condition_failure() {
        Some(ConditionFailure::A1 { sup }) => assert!(*sup > 1.99),
        other => panic!("expected the curvature failure, got {other:?} ({e})"),
    }
}

#[test]
fn reference_time_is_enforced() {
    let s = Survival::new(&make_stable(1.0).unwrap(), 1.0).unwrap();
    let e = s.eval(1.0, 0.5, 0, 1e-6, Some(1.0)).unwrap_err();
    assert!(matches!(e.condition_failure(), Some(ConditionFailure::TimeBelowReference { .. })));
    assert!(s.eval(1.0, 1.0, 0, 1e-6, Some(1.0)).is_ok());
    assert!(s.eval(1.0, 1.0, 1, 1e-6, Some(1.0)).is_err());
    assert!(matches!(s.eval(1.0, 1.0, 9, 1e-6, None), Err(FptError::InvalidInput(_))));
}

#[test]
fn stable_derivative_is_consistent_with_differences() {
    let s = Survival::new(&make_stable(1.5).unwrap(), 1.0).unwrap();
    let (x, t, h) = (1.0, 0.7, 1e-3);
    let p = |t: f64| s.eval(x, t, 0, 1e-9, None).unwrap().value.mid();
    let fd = (p(t - h) - p(t + h)) / (2.0 * h);
    let d = s.eval(x, t, 1, 1e-9, None).unwrap().value;
    assert!((fd - d.mid()).abs() < 1e-6, "{fd} vs {d}");
}

#[test]
fn large_time_limits() {
    let b = asymptotic_t(&brownian(), 0, 1.0).unwrap();
    assert!((b.mid() - 1.0 / PI.sqrt()).abs() < 1e-9);
    let s = make_stable(1.0).unwrap();
    let v = asymptotic_t(&s, 0, PI).unwrap();
    assert!((v.mid() - 2.0 / PI.sqrt()).abs() < 1e-8, "{v}");
    // Γ(3/2) = √π/2 with the sign of the first derivative
    let v1 = asymptotic_t(&s, 1, PI).unwrap();
    assert!((v1.mid() + 1.0 / PI.sqrt()).abs() < 1e-8, "{v1}");
    assert!(matches!(asymptotic_t(&make_compound_poisson_laplace(), 0, 1.0), Err(FptError::Unsupported(_))));
}

#[test]
fn small_barrier_limits() {
    let s = make_stable(1.0).unwrap();
    // Γ(1/2)/(πΓ(3/2)) = 2/π
    assert!((asymptotic_x(&s, 0, 1.0, None).unwrap() - 2.0 / PI).abs() < 1e-12);
    assert!((asymptotic_x(&s, 0, 4.0, None).unwrap() - 1.0 / PI).abs() < 1e-12);
    assert!((asymptotic_x(&s, 1, 1.0, Some(0.5)).unwrap() + 1.0 / PI).abs() < 1e-12);
    let g = make_geometric_stable(1.0).unwrap();
    assert!((asymptotic_x(&g, 0, 1.0, None).unwrap() - 2f64.sqrt() / PI.sqrt()).abs() < 1e-12);
}

#[test]
fn small_barrier_convergence() {
    let s = make_stable(1.0).unwrap();
    let surv = Survival::new(&s, 1e-3).unwrap();
    let x = 1e-3;
    let v = surv.eval(x, 1.0, 0, 1e-8, None).unwrap().value.mid() * s.eval(1.0 / (x * x)).sqrt();
    assert!((v / (2.0 / PI) - 1.0).abs() < 0.03, "{v}");
}

#[test]
fn tail_bound_examples() {
    let s = make_stable(1.0).unwrap();
    let b = tail_bound(&s, 1, 1.0, 5.0, 1e-10).unwrap();
    assert!(b.certified && b.value.lo == 0.0);
    // direct quadrature of (4/π)∫_5^∞ e^{−λ}√(1/(2λ)) λ^{1/2} dλ = (4/π)e^{−5}/√2
    let direct = 4.0 / PI * (-5f64).exp() / 2f64.sqrt();
    assert!(b.value.hi >= direct, "{} < {direct}", b.value.hi);
    assert!(tail_bound(&s, 0, 0.0, 1.0, 1e-8).is_err());
}

#[test]
fn constants_of_the_two_sided_estimate() {
    for n in 0..=8 {
        for theta in [0.0, 0.3, PI / 8.0, 0.9, 1.4] {
            let nh = n as f64 + 0.5;
            let lower = (FRAC_PI_2 - theta).powf(2.0 * nh) / (17.0 * nh * 2f64.powi(2 * n as i32 + 3));
            assert!(c1(n, theta) >= lower, "n={n} theta={theta}");
            let want = E * 2f64.sqrt() / PI
                * ((2.0 * CATALAN / PI).exp() + 2.0 / (FRAC_PI_2 - theta))
                * (2.0 * half_integer_gamma(nh) + PI * (nh / E).powf(nh));
            assert!((c2(n, theta) - want).abs() < 1e-12 * want, "n={n} theta={theta}");
            assert!(c1(n, theta + 0.05) < c1(n, theta) && c2(n, theta + 0.05) > c2(n, theta));
        }
    }
}

/// `Γ(k + 1/2) = √π · (1/2)(3/2)⋯(k − 1/2)`.
fn half_integer_gamma(a: f64) -> f64 {
    let k = (a - 0.5).round() as u32;
    let mut v = PI.sqrt();
    for j in 0..k {
        v *= j as f64 + 0.5;
    }
    v
}

#[test]
fn estimate_band_examples() {
    let s = make_stable(1.0).unwrap();
    let band = estimate_band(&s, 0, 1.0, 100.0);
    assert!(band.valid);
    let theta = PI / 8.0;
    // m = min(ψ(1)^0, 1/(100^{1/2}·1)) = 1/10
    assert!(band.lower <= c1(0, theta) / 10.0 * (1.0 + 1e-12) && band.upper >= c2(0, theta) / 10.0 * (1.0 - 1e-12));
    assert!((band.lower - c1(0, theta) / 10.0).abs() < 1e-3 * c1(0, theta));
    assert!((band.upper - c2(0, theta) / 10.0).abs() < 1e-3 * c2(0, theta));
    let p = survival(&request(s.clone(), 1.0, 100.0, 0)).unwrap().value;
    assert!(p.hi >= band.lower && p.lo <= band.upper);
    assert!(!estimate_band(&make_compound_poisson_laplace(), 0, 1.0, 1.0).valid);
    let b = estimate_band(&brownian(), 0, 1.0, 50.0);
    let want = brownian_survival(1.0, 50.0);
    assert!(b.valid && b.lower <= want && want <= b.upper);
}

#[test]
fn incomplete_gamma_values() {
    for x in [0.1, 1.0, 7.0] {
        assert!((incomplete_gamma_upper(1.0, x) - (-x as f64).exp()).abs() < 1e-15);
        let want = PI.sqrt() * (1.0 - erf(f64::sqrt(x)));
        assert!((incomplete_gamma_upper(0.5, x) - want).abs() < 1e-13 * want.max(1e-3));
    }
    assert!((incomplete_gamma_upper(0.0, 1.0) - 0.219_383_934_395_520_27).abs() < 1e-15);
    assert_eq!(incomplete_gamma_lower(2.0, 0.0), 0.0);
    assert!((incomplete_gamma_lower(2.0, f64::INFINITY) - 1.0).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn incomplete_gamma_halves_sum_to_gamma(a in 0.1f64..9.0, x in 0.01f64..30.0) {
        let total = incomplete_gamma_lower(a, x) + incomplete_gamma_upper(a, x);
        let g = incomplete_gamma_lower(a, f64::INFINITY);
        prop_assert!((total - g).abs() <= 1e-12 * g);
    }

    #[test]
    fn tail_bound_shrinks(t in 0.1f64..10.0, l in 0.1f64..10.0, n in 0u32..4) {
        let s = make_stable(1.0).unwrap();
        let a = tail_bound(&s, n, t, l, 1e-8).unwrap().value.hi;
        prop_assert!(tail_bound(&s, n, 2.0 * t, l, 1e-8).unwrap().value.hi <= a);
        prop_assert!(tail_bound(&s, n, t, 2.0 * l, 1e-8).unwrap().value.hi <= a);
        prop_assert!(tail_bound(&s, n, t, 1e3 * l, 1e-8).unwrap().value.hi < 1e-6 * a.max(1e-300) + 1e-300);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn survival_is_monotone(ut in -1.5f64..1.0, x in 0.2f64..3.0, r in 1.1f64..3.0) {
        let s = Survival::new(&make_stable(1.0).unwrap(), 0.2).unwrap();
        let t = 10f64.powf(ut);
        let p = s.eval(x, t, 0, 1e-8, None).unwrap().value;
        let later = s.eval(x, t * r, 0, 1e-8, None).unwrap().value;
        let higher = s.eval(x * r, t, 0, 1e-8, None).unwrap().value;
        prop_assert!(later.lo <= p.hi && higher.hi >= p.lo);
        prop_assert!(p.lo >= -1e-8 && p.hi <= 1.0 + 1e-8);
        prop_assert!(s.eval(x, t, 1, 1e-8, None).unwrap().value.hi >= 0.0);
    }
}
