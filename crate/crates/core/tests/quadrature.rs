mod common;

use std::f64::consts::PI;

use fpt_core::quadrature::{
    enclose_on, integrate, integrate_finite, kronrod_panel, Domain, IntegrandSpec, RangeFn, Removable,
};
use fpt_core::Enclosure;
use proptest::prelude::*;

#[test]
fn kronrod_panel_weights() {
    let p = kronrod_panel(-1.0, 3.0);
    let wk: f64 = p.iter().map(|n| n.1).sum();
    let wg: f64 = p.iter().map(|n| n.2).sum();
    assert!((wk - 4.0).abs() < 1e-14 && (wg - 4.0).abs() < 1e-14);
    assert_eq!(p.iter().filter(|n| n.2 != 0.0).count(), 10);
    // degree 31 exactness of the Kronrod rule
    let m: f64 = p.iter().map(|&(x, w, _)| w * x.powi(30)).sum();
    let want = (3f64.powi(31) + 1.0) / 31.0;
    assert!((m - want).abs() <= 1e-12 * want);
}

#[test]
fn smooth_integrals() {
    let r = integrate_finite(f64::sin, 0.0, PI, 1e-12);
    assert!(r.converged && r.value.contains(2.0) && r.value.width() < 1e-11, "{}", r.value);
    let r = integrate_finite(|x| 1.0 / (1.0 + x * x), -1.0, 1.0, 1e-12);
    assert!(r.value.contains(PI / 2.0));
    let r = integrate_finite(f64::sqrt, 0.0, 1.0, 1e-10);
    assert!(r.value.contains(2.0 / 3.0), "{}", r.value);
}

#[test]
fn oscillatory_integral_with_period_cap() {
    let spec = IntegrandSpec::finite(|x| (50.0 * x).cos(), 0.0, 10.0).with_period(2.0 * PI / 50.0);
    let r = integrate(&spec, 1e-11, 10_000);
    assert!(r.value.contains((500f64).sin() / 50.0), "{}", r.value);
}

#[test]
fn semi_infinite_tail_is_added() {
    // ∫₀^∞ e^{−x} dx with tail e^{−c}
    let spec = IntegrandSpec::semi_infinite(|x| (-x).exp(), 0.0, |c| (-c).exp(), true);
    let r = integrate(&spec, 1e-10, 10_000);
    assert!(r.value.contains(1.0) && r.tail_bound_used > 0.0, "{}", r.value);
    // ∫₀^∞ dx/(1+x)² = 1 with tail 1/(1+c)
    let spec = IntegrandSpec::semi_infinite(|x| 1.0 / (1.0 + x).powi(2), 0.0, |c| 1.0 / (1.0 + c), true);
    assert!(integrate(&spec, 1e-8, 10_000).value.contains(1.0));
}

#[test]
fn mapped_domain() {
    let spec = IntegrandSpec::new(|x| Enclosure::point((-x * x).exp()), Domain::Mapped(0.0));
    assert!(integrate(&spec, 1e-10, 10_000).value.contains(PI.sqrt() / 2.0));
}

#[test]
fn removable_point_is_hulled() {
    // sin(x)/x on [-1, 1]; the evaluator is undefined at 0
    let f = |x: f64| Enclosure::point(x.sin() / x);
    let r = Removable { at: 0.0, radius: 1e-4, value: Enclosure::new(1.0 - 1e-8, 1.0) };
    let spec = IntegrandSpec::new(f, Domain::Finite(-1.0, 1.0)).with_removable(r);
    let want = 2.0 * 0.946_083_070_367_183_0;
    let v = integrate(&spec, 1e-9, 10_000).value;
    assert!(v.contains(want) && v.width() < 1e-7, "{v}");
}

#[test]
fn kink_resolved_by_breaks() {
    let spec = IntegrandSpec::finite(|x: f64| (x - 0.3).abs(), 0.0, 1.0).with_breaks([0.3]);
    let r = integrate(&spec, 1e-13, 100);
    assert!(r.value.contains(0.5 * (0.09 + 0.49)) && r.subintervals_used <= 4, "{r:?}");
}

#[test]
fn budget_exhaustion_is_reported() {
    let r = integrate_finite(|x| (1.0 / x).sin(), 1e-6, 1.0, 1e-14);
    assert!(!r.converged);
    assert!(r.require("oscillation near zero", 1e-14, 1.0).is_err());
}

proptest! {
    #[test]
    fn monomials(k in 0i32..12, a in -2.0f64..0.0, b in 0.1f64..3.0) {
        let r = integrate_finite(|x| x.powi(k), a, b, 1e-12);
        let want = (b.powi(k + 1) - a.powi(k + 1)) / (k + 1) as f64;
        prop_assert!(r.value.contains(want), "{} vs {want}", r.value);
    }

    #[test]
    fn agrees_with_double_exponential_rule(c in 0.1f64..5.0, b in 0.5f64..4.0) {
        let f = move |x: f64| (-c * x).exp() * (x + 1.0).ln();
        let r = integrate_finite(f, 0.0, b, 1e-12);
        let other = common::tanh_sinh(f, 0.0, b);
        prop_assert!((r.value.mid() - other).abs() < 1e-11 + r.value.width(), "{} vs {other}", r.value);
    }

    #[test]
    fn monotone_ranges_enclose_samples(lo in -3.0f64..3.0, w in 0.0f64..2.0, s in 0.0f64..1.0) {
        let sub = Enclosure::new(lo, lo + w);
        let x = lo + s * w;
        prop_assert!(enclose_on(RangeFn::Increasing(&f64::exp), sub).contains(x.exp()));
        let dec = |y: f64| -y.powi(3);
        prop_assert!(enclose_on(RangeFn::Decreasing(&dec), sub).contains(dec(x)));
        let ext = |e: Enclosure| e.sqr();
        prop_assert!(enclose_on(RangeFn::Extension(&ext), sub).contains(x * x));
    }
}
