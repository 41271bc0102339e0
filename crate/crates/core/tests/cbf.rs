mod common;

use fpt_core::cbf::{
    brownian, catalog, check_condition_a1_default, make_compound_poisson_laplace, make_relativistic,
    make_inverse_log, make_series_irregular, make_stable,
};
use fpt_core::descriptor::make_catalog_family;
use num_complex::Complex64;
use proptest::prelude::*;

fn spec_index() -> impl Strategy<Value = usize> {
    0..catalog().len()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn bernstein_shape(i in spec_index(), u in -12.0f64..12.0) {
        let spec = &catalog()[i];
        let x = 10f64.powf(u);
        let (p, d1, d2) = spec.eval3(x);
        prop_assert!(p > 0.0 && d1 > 0.0 && d2 <= 0.0, "{spec} at {x}: {p} {d1} {d2}");
        prop_assert!(x * d1 <= p * (1.0 + 1e-12), "{spec} at {x}");
        prop_assert!(-x * d2 <= 2.0 * d1 * (1.0 + 1e-12), "{spec} at {x}");
    }

    #[test]
    fn difference_matches_plain_subtraction(i in spec_index(), u in -6.0f64..6.0, v in -20.0f64..20.0) {
        let spec = &catalog()[i];
        let (a, b) = (10f64.powf(u), 10f64.powf(u + v));
        let plain = spec.eval(a) - spec.eval(b);
        let scale = spec.eval(a).max(spec.eval(b));
        prop_assert!((spec.difference(a, b) - plain).abs() <= 1e-10 * scale, "{spec}");
    }

    #[test]
    fn upper_half_plane_maps_to_itself(i in spec_index(), re in -5.0f64..5.0, im in 0.01f64..5.0) {
        let spec = &catalog()[i];
        let w = spec.eval_complex(Complex64::new(re, im));
        prop_assert!(w.im >= -1e-12 * w.norm(), "{spec}: {w}");
    }

    #[test]
    fn complex_extension_agrees_on_positive_axis(i in spec_index(), u in -4.0f64..4.0) {
        let spec = &catalog()[i];
        let x = 10f64.powf(u);
        let w = spec.eval_complex(Complex64::new(x, 0.0));
        prop_assert!((w.re - spec.eval(x)).abs() <= 1e-12 * spec.eval(x));
        prop_assert!(w.im.abs() <= 1e-12 * spec.eval(x));
    }
}

#[test]
fn stable_is_a_power() {
    for alpha in [0.5, 1.0, 1.5] {
        let s = make_stable(alpha).unwrap();
        for x in [1e-3f64, 0.7, 2.0, 1e5] {
            let want = x.powf(alpha / 2.0);
            assert!((s.eval(x) - want).abs() <= 1e-14 * want);
        }
    }
    assert_eq!(brownian().eval(3.5), 3.5);
}

#[test]
fn relativistic_closed_form() {
    let s = make_relativistic(1.0, 1.0).unwrap();
    for x in [1e-8f64, 0.3, 4.0, 1e6] {
        // conjugate form of √(x+1) − 1, free of cancellation
        let want = x / ((x + 1.0).sqrt() + 1.0);
        assert!((s.eval(x) - want).abs() <= 1e-14 * want, "{x}");
    }
}

#[test]
fn bounded_differences_keep_their_digits() {
    let s = make_compound_poisson_laplace();
    let (a, b) = (1e12, 1e12 * (1.0 + 1e-9));
    let want = 1.0 / (1.0 + a) - 1.0 / (1.0 + b);
    assert!((s.difference(b, a) - want).abs() <= 1e-6 * want);
}

#[test]
fn inverse_log_cut_values_at_huge_arguments() {
    // ψ⁺(−s) = 1/log(1 − 1/s) ≈ −s + 1/2
    let p = make_inverse_log(2.0).unwrap();
    for u in [1e100, 2e159, 1e300] {
        let w = p.boundary(u);
        assert!((w.re / u + 1.0).abs() < 1e-14, "{u}: {w}");
    }
}

#[test]
fn limits_at_infinity() {
    assert_eq!(make_compound_poisson_laplace().limit_at_infinity(), 1.0);
    assert_eq!(make_stable(1.0).unwrap().limit_at_infinity(), f64::INFINITY);
    let series = make_series_irregular(1e-18).unwrap();
    let l = series.limit_at_infinity();
    assert!((series.eval(1e300) - l).abs() <= 1e-12 * l);
    for spec in catalog() {
        let l = spec.limit_at_infinity();
        assert_eq!(l.is_finite(), !spec.is_unbounded(), "{spec}");
    }
}

#[test]
fn curvature_condition_on_known_families() {
    for alpha in [0.5, 1.0, 1.5] {
        let c = check_condition_a1_default(&make_stable(alpha).unwrap());
        assert!(c.passes);
        assert!((c.sup_estimate - (1.0 - alpha / 2.0)).abs() < 1e-12);
    }
    // 2ξ/(1+ξ) increases to 2
    let c = check_condition_a1_default(&make_compound_poisson_laplace());
    assert!(!c.passes);
    assert!(c.sup_estimate > 1.99 && c.sup_estimate <= 2.0);
}

#[test]
fn catalog_descriptors_rebuild_the_same_function() {
    for spec in catalog() {
        let d = spec.descriptor().expect("catalog specs carry a descriptor");
        let again = make_catalog_family(d).unwrap();
        for x in [1e-3, 1.0, 1e3] {
            assert_eq!(spec.eval(x), again.eval(x), "{d}");
        }
    }
}

#[test]
fn only_bounded_members_fail_the_curvature_condition() {
    for spec in catalog() {
        assert_eq!(check_condition_a1_default(&spec).passes, spec.is_unbounded(), "{}", common::name(&spec));
    }
    assert_eq!(common::passing_catalog().len(), 12);
}
