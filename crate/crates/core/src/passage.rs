//! Survival function `P(τ_x > t)` of the first passage time above `x`, and
//! its `t`-derivatives, from the spectral formula
//!
//! ```text
//! (−1)ⁿ dⁿ/dtⁿ P(τ_x > t) = (2/π) ∫₀^∞ √(ψ'(λ²)/ψ(λ²)) ψ(λ²)ⁿ e^{−tψ(λ²)} F_λ(x) dλ.
//! ```
//!
//! The λ-integral is split into four pieces:
//! - `[0, λm]`: bounded in closed form using `0 ≤ F_λ(x) ≤ C·λ√ψ'(λ²)/√(ψ(1/x²) − ψ(λ²))`;
//! - `[λm, λ0]`: quadrature in `log λ`, where `F_λ(x) > 0`;
//! - `[λ0, Λ]`: quadrature with panels capped at the half period `π/x`;
//! - `[Λ, ∞)`: `±I_n(t, Λ)`, using `|F_λ| ≤ 2`.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use crate::cbf::{check_condition_a1, check_condition_a1_default, check_condition_a2, log_grid, ConditionA1, ProcessSpec};
use crate::enclosure::Enclosure;
use crate::error::{ConditionFailure, FptError, Result};
use crate::quadrature::{integrate, IntegrandSpec};
use crate::special::{gamma, CATALAN};
use crate::spectral::{EigenTable, RenewalEval, Y_MIN};

pub use crate::special::{incomplete_gamma_lower, incomplete_gamma_upper};

/// Largest supported derivative order.
pub const MAX_ORDER: u32 = 8;
const BUDGET: usize = 200_000;

#[derive(Clone, Debug)]
pub struct SurvivalRequest {
    pub spec: ProcessSpec,
    pub x: f64,
    pub t: f64,
    pub n: u32,
    pub tol: f64,
    /// Reference time of the integrability condition; `None` picks a default.
    pub t0: Option<f64>,
}

#[derive(Clone, Copy, Debug)]
pub struct SurvivalResult {
    /// `(−1)ⁿ dⁿ/dtⁿ P(τ_x > t)`.
    pub value: Enclosure,
    /// Cutoff `Λ` of the λ-integral.
    pub cutoff: f64,
    /// `I_n(t, Λ)`, the tail beyond the cutoff.
    pub tail_bound: f64,
    /// Lower end `λm` of the quadrature range.
    pub lambda_small: f64,
    /// Panels used in the oscillatory range `[λ0, Λ]`.
    pub subintervals: usize,
    pub cond_a1: bool,
    /// `None` when the integrability condition holds for every reference time.
    pub cond_a2: Option<bool>,
}

/// `I_n(t, λ0) = (4/π)∫_{λ0}^∞ e^{−tψ(λ²)} √ψ'(λ²) ψ(λ²)^{n−½} dλ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TailBound {
    pub n: u32,
    pub t: f64,
    pub lambda0: f64,
    pub value: Enclosure,
    /// Whether `value` is a proven enclosure (closed-form majorant) rather
    /// than a quadrature with an estimated tail.
    pub certified: bool,
}

/// Closed-form majorants of `I_n(t, Λ)`, using the global curvature bound
/// `rho` when it is below one, and the local one on `[Λ², ∞)` when it is at most one.
fn tail_majorant(spec: &ProcessSpec, n: u32, t: f64, lambda: f64, rho: f64) -> Option<f64> {
    let l2 = lambda * lambda;
    let z = spec.eval(l2);
    let nf = n as f64;
    let mut best: Option<f64> = None;
    let mut take = |v: f64| {
        if v.is_finite() {
            best = Some(best.map_or(v, |b: f64| b.min(v)));
        }
    };
    if rho < 1.0 && spec.eval(1e-300) < 1e-100 {
        take(2.0 / (PI * (1.0 - rho).sqrt()) * incomplete_gamma_upper(nf, t * z) / t.powf(nf));
    }
    let local = check_condition_a1(spec, &log_grid(l2, l2 * 1e12, 96));
    if local.sup_estimate <= 1.0 {
        let d = (l2 * spec.deriv1(l2)).sqrt();
        take(2.0 / PI * incomplete_gamma_upper(nf + 0.5, t * z) / (t.powf(nf + 0.5) * d));
    }
    best
}

/// `I_n` by quadrature in `u = log λ` up to `λ = e^{300}`, with a power-law tail estimate.
fn tail_quadrature(spec: &ProcessSpec, n: u32, t: f64, lambda: f64, tol: f64) -> Result<Enclosure> {
    const U_MAX: f64 = 300.0;
    let nf = n as f64;
    let h = move |u: f64| -> f64 {
        let l = u.exp();
        let (p, d1, _) = spec.eval3(l * l);
        if p <= 0.0 {
            return 0.0;
        }
        4.0 / PI * ((nf - 0.5) * p.ln() - t * p).exp() * d1.sqrt() * l
    };
    let a = lambda.ln();
    if a >= U_MAX {
        return Ok(Enclosure::new(0.0, f64::INFINITY));
    }
    let is = IntegrandSpec::finite(h, a, U_MAX).with_max_panel(2.0);
    let r = integrate(&is, tol, BUDGET).require("tail integral", tol, 4.0)?;
    let (h1, h2) = (h(0.5 * (a + U_MAX)), h(U_MAX));
    let est = if h2 == 0.0 {
        0.0
    } else {
        let p = (h1 / h2).ln() / (U_MAX / (0.5 * (a + U_MAX))).ln();
        if p > 1.0 {
            h2 * U_MAX / (p - 1.0)
        } else {
            f64::INFINITY
        }
    };
    if !est.is_finite() {
        return Err(FptError::condition(ConditionFailure::A2 { t0: t }, spec));
    }
    Ok(r + Enclosure::new(0.0, est))
}

/// `I_n(t, λ0)`: the closed-form majorant when available, else quadrature.
pub fn tail_bound(spec: &ProcessSpec, n: u32, t: f64, lambda0: f64, tol: f64) -> Result<TailBound> {
    if !(t > 0.0 && lambda0 > 0.0) {
        return Err(FptError::InvalidInput(format!("tail bound needs t, lambda0 > 0 (got {t}, {lambda0})")));
    }
    let rho = check_condition_a1_default(spec).sup_estimate;
    if let Some(b) = tail_majorant(spec, n, t, lambda0, rho) {
        return Ok(TailBound { n, t, lambda0, value: Enclosure::new(0.0, b), certified: true });
    }
    let value = tail_quadrature(spec, n, t, lambda0, tol)?;
    Ok(TailBound { n, t, lambda0, value, certified: false })
}

fn sandwich() -> f64 {
    (2.0 * CATALAN / PI).exp()
}

/// Constant of the upper small-`λx` eigenfunction bound.
fn small_x_constant(theta: f64) -> f64 {
    2.0 * (1.0 + 2.0 * CATALAN / PI).exp() + 4.0 * std::f64::consts::E / (FRAC_PI_2 - theta)
}

/// `C₁(n, Θ)` of the two-sided estimate.
pub fn c1(n: u32, theta: f64) -> f64 {
    let e = std::f64::consts::E;
    let nh = n as f64 + 0.5;
    (1.0 - 2.0 * CATALAN / PI).exp() * (1.0 - PI * PI / 16.0).sqrt() * (PI / 4.0 - theta / 2.0).powf(2.0 * nh)
        / (2.0 * PI * e * (e + 1.0) * nh)
}

/// `C₂(n, Θ)` of the two-sided estimate.
pub fn c2(n: u32, theta: f64) -> f64 {
    let e = std::f64::consts::E;
    let nh = n as f64 + 0.5;
    e * SQRT_2 / PI * (sandwich() + 2.0 / (FRAC_PI_2 - theta)) * (2.0 * gamma(nh) + PI * (nh / e).powf(nh))
}

/// Survival evaluator for one spec, reusing eigenfunction tables across calls.
#[derive(Debug)]
pub struct Survival {
    spec: ProcessSpec,
    table: EigenTable,
    a1: ConditionA1,
    /// Upper bound on `sup_λ ϑ_λ`.
    theta_sup: f64,
}

impl Survival {
    /// Fails when the curvature condition does not hold. `x_min` is the
    /// smallest barrier that will be queried.
    pub fn new(spec: &ProcessSpec, x_min: f64) -> Result<Survival> {
        let a1 = check_condition_a1_default(spec);
        if !a1.passes {
            return Err(FptError::condition(ConditionFailure::A1 { sup: a1.sup_estimate }, spec));
        }
        let table = EigenTable::new(spec, x_min, 1e-10)?;
        let theta_sup = table.theta_sup().min(a1.theta_bound);
        Ok(Survival { spec: spec.clone(), table, a1, theta_sup })
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    pub fn theta_sup(&self) -> f64 {
        self.theta_sup
    }

    /// Checks the integrability condition; `None` when it holds for every `t0`.
    pub fn check_time(&self, t: f64, n: u32, t0: Option<f64>) -> Result<Option<bool>> {
        if let Some(t0) = t0 {
            let ok = if n == 0 { t >= t0 } else { t > t0 };
            if !ok {
                return Err(FptError::condition(ConditionFailure::TimeBelowReference { t, t0 }, &self.spec));
            }
        }
        let grows = self.spec.meta().rv_order_inf.is_some_and(|r| r > 0.0);
        if grows && t0.is_none() {
            return Ok(None);
        }
        let t0 = t0.unwrap_or(t);
        if t0 <= 0.0 {
            return if grows { Ok(None) } else { Err(FptError::condition(ConditionFailure::A2 { t0 }, &self.spec)) };
        }
        if check_condition_a2(&self.spec, t0, 1e-6).passes {
            Ok(Some(true))
        } else {
            Err(FptError::condition(ConditionFailure::A2 { t0 }, &self.spec))
        }
    }

    /// Weight `(2/π)√(ψ'/ψ)ψⁿe^{−tψ}` at `λ`.
    fn weight(&self, lambda: f64, t: f64, n: u32) -> f64 {
        let l2 = lambda * lambda;
        let (p, d1, _) = self.spec.eval3(l2);
        if p <= 0.0 {
            return 0.0;
        }
        2.0 / PI * (d1 / p).sqrt() * (n as f64 * p.ln() - t * p).exp()
    }

    /// Cutoff `Λ ≥ start` with `I_n(t, Λ) ≤ target`.
    fn cutoff(&self, n: u32, t: f64, start: f64, target: f64) -> Result<(f64, f64)> {
        let rho = self.a1.sup_estimate;
        let bound = |l: f64| -> Result<f64> {
            match tail_majorant(&self.spec, n, t, l, rho) {
                Some(b) => Ok(b),
                None => Ok(tail_quadrature(&self.spec, n, t, l, 0.1 * target)?.hi),
            }
        };
        let mut hi = start.max(1e-300);
        let mut b = bound(hi)?;
        if b <= target {
            return Ok((hi, b));
        }
        let mut lo = hi;
        while b > target {
            lo = hi;
            hi *= 4.0;
            if hi > 1e150 {
                return Err(FptError::Quadrature { what: "survival cutoff", achieved: b, tol: target });
            }
            b = bound(hi)?;
        }
        for _ in 0..12 {
            let m = (lo * hi).sqrt();
            let bm = bound(m)?;
            if bm <= target {
                hi = m;
                b = bm;
            } else {
                lo = m;
            }
        }
        Ok((hi, b))
    }

    /// `λm ≤ cap` with the `[0, λm]` piece at most `target`; returns `(λm, bound)`.
    fn small_cutoff(&self, x: f64, n: u32, cap: f64, target: f64) -> (f64, f64) {
        let z_big = self.spec.eval(1.0 / (x * x));
        let c = small_x_constant(self.theta_sup) / PI;
        let nh = n as f64 + 0.5;
        let bound = |l: f64| -> f64 {
            let zm = self.spec.eval(l * l);
            c * zm.powf(nh) / (nh * (z_big - zm).max(0.0).sqrt())
        };
        let floor = if self.spec.meta().homogeneity.is_some() { 4.0 * Y_MIN / x } else { 1e-30 };
        if bound(cap) <= target {
            return (cap, bound(cap));
        }
        if bound(floor) > target {
            return (floor, bound(floor));
        }
        let (mut lo, mut hi) = (floor.ln(), cap.ln());
        for _ in 0..80 {
            let m = 0.5 * (lo + hi);
            if bound(m.exp()) <= target {
                lo = m;
            } else {
                hi = m;
            }
        }
        (lo.exp(), bound(lo.exp()))
    }

    pub fn eval(&self, x: f64, t: f64, n: u32, tol: f64, t0: Option<f64>) -> Result<SurvivalResult> {
        if !(x > 0.0 && x.is_finite() && t > 0.0 && t.is_finite() && tol > 0.0) {
            return Err(FptError::InvalidInput(format!("survival needs x, t, tol > 0 (got x={x}, t={t}, tol={tol})")));
        }
        if n > MAX_ORDER {
            return Err(FptError::InvalidInput(format!("derivative order {n} exceeds {MAX_ORDER}")));
        }
        let cond_a2 = self.check_time(t, n, t0)?;
        let lambda0 = (FRAC_PI_2 - self.theta_sup) / (2.0 * x);
        let (lm, small) = self.small_cutoff(x, n, lambda0.min(0.5 / x), tol / 8.0);
        let (cutoff, tail) = self.cutoff(n, t, lambda0, tol / 8.0)?;

        let err = std::cell::RefCell::new(None);
        let integrand = |lambda: f64| -> Enclosure {
            match self.table.eigenfunction(lambda, x) {
                Ok(f) => f * self.weight(lambda, t, n),
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    Enclosure::new(f64::NEG_INFINITY, f64::INFINITY)
                }
            }
        };
        let low = if lm < lambda0 {
            let f = |u: f64| {
                let l = u.exp();
                integrand(l).scale(l)
            };
            let is = IntegrandSpec::new(f, crate::quadrature::Domain::Finite(lm.ln(), lambda0.ln())).with_max_panel(1.0);
            integrate(&is, tol / 4.0, BUDGET).value
        } else {
            Enclosure::exact(0.0)
        };
        let osc = if cutoff > lambda0 {
            let is = IntegrandSpec::new(integrand, crate::quadrature::Domain::Finite(lambda0, cutoff)).with_max_panel(PI / x);
            let budget = ((cutoff - lambda0) * x / PI) as usize * 2 + BUDGET;
            integrate(&is, tol / 4.0, budget)
        } else {
            crate::quadrature::QuadratureResult {
                value: Enclosure::exact(0.0),
                subintervals_used: 0,
                tail_bound_used: 0.0,
                converged: true,
            }
        };
        if let Some(e) = err.borrow_mut().take() {
            return Err(e);
        }
        let value = Enclosure::new(0.0, small) + low + osc.value + Enclosure::new(-tail, tail);
        if !(value.is_finite() && value.width() <= tol) {
            return Err(FptError::Quadrature { what: "survival", achieved: value.width(), tol });
        }
        Ok(SurvivalResult {
            value,
            cutoff,
            tail_bound: tail,
            lambda_small: lm,
            subintervals: osc.subintervals_used,
            cond_a1: self.a1.passes,
            cond_a2,
        })
    }
}

/// One survival evaluation; build a [`Survival`] directly for grids.
pub fn survival(req: &SurvivalRequest) -> Result<SurvivalResult> {
    Survival::new(&req.spec, req.x)?.eval(req.x, req.t, req.n, req.tol, req.t0)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EstimateBand {
    pub lower: f64,
    pub upper: f64,
    /// Whether the band is proven and its lower end positive.
    pub valid: bool,
}

/// Two-sided estimate `C₁·m − I_n ≤ (−1)ⁿ dⁿ/dtⁿ P(τ_x > t) ≤ C₂·m + I_n`
/// with `m = min(ψ(1/x²)ⁿ, t^{−n−½}ψ(1/x²)^{−½})` and `I_n = I_n(t, λ0(x))`.
pub fn estimate_band(spec: &ProcessSpec, n: u32, x: f64, t: f64) -> EstimateBand {
    let a1 = check_condition_a1_default(spec);
    if !a1.passes || x <= 0.0 || t <= 0.0 {
        return EstimateBand { lower: 0.0, upper: f64::INFINITY, valid: false };
    }
    let theta = a1.theta_bound;
    let z = spec.eval(1.0 / (x * x));
    let nf = n as f64;
    let m = z.powf(nf).min(1.0 / (t.powf(nf + 0.5) * z.sqrt()));
    let lambda0 = (FRAC_PI_2 - theta) / (2.0 * x);
    let i = tail_bound(spec, n, t, lambda0, 1e-6).map(|b| b.value.hi).unwrap_or(f64::INFINITY);
    let lower = c1(n, theta) * m - i;
    let upper = c2(n, theta) * m + i;
    EstimateBand { lower, upper, valid: i.is_finite() && lower > 0.0 }
}

/// `(−1)ⁿ Γ(n+½)/π · V(x)`, the limit of `t^{n+½} dⁿ/dtⁿ P(τ_x > t)` as `t → ∞`.
pub fn asymptotic_t(spec: &ProcessSpec, n: u32, x: f64) -> Result<Enclosure> {
    if !spec.is_unbounded() {
        return Err(FptError::Unsupported(format!("large-time limit needs unbounded psi ({spec})")));
    }
    let v = RenewalEval::new(spec, 1e-10)?.value(x);
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    Ok(v.scale(sign * gamma(n as f64 + 0.5) / PI))
}

/// Limit of `√ψ(1/x²) dⁿ/dtⁿ P(τ_x > t)` as `x → 0⁺`:
/// `(−1)ⁿ Γ(n+½)/(π Γ(1+ϱ)) t^{−n−½}` with `ϱ` the order of `ψ` at infinity.
///
/// Geometric-stable specs report the slowly varying form
/// `(−1)ⁿ Γ(n+½)/(π √(α/2)) t^{−n−½}`, normalized by `√log(1/x)` instead.
pub fn asymptotic_x(spec: &ProcessSpec, n: u32, t: f64, rho_inf: Option<f64>) -> Result<f64> {
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let g = gamma(n as f64 + 0.5) / (PI * t.powf(n as f64 + 0.5));
    if let Some(alpha) = geometric_stable_alpha(spec) {
        return Ok(sign * g / (alpha / 2.0).sqrt());
    }
    let rho = rho_inf
        .or(spec.meta().rv_order_inf)
        .ok_or_else(|| FptError::Unsupported(format!("regular-variation order at infinity unknown for {spec}")))?;
    Ok(sign * g / gamma(1.0 + rho))
}

fn geometric_stable_alpha(spec: &ProcessSpec) -> Option<f64> {
    spec.descriptor()?.strip_prefix("family=geometric-stable alpha=")?.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbf::{brownian, make_stable};
    use crate::special::erf;

    #[test]
    fn brownian_survival_is_erf() {
        let r = survival(&SurvivalRequest { spec: brownian(), x: 2.0, t: 1.0, n: 0, tol: 1e-7, t0: None }).unwrap();
        assert!(r.value.contains(erf(1.0)), "{}", r.value);
    }

    #[test]
    fn brownian_large_time_limit() {
        let a = asymptotic_t(&brownian(), 0, 1.0).unwrap();
        assert!(a.contains(1.0 / PI.sqrt()), "{a}");
    }

    #[test]
    fn small_x_constants() {
        let s = make_stable(1.0).unwrap();
        assert!((asymptotic_x(&s, 0, 1.0, None).unwrap() - 2.0 / PI).abs() < 1e-14);
        assert!((asymptotic_x(&brownian(), 0, 4.0, None).unwrap() - 0.5 / PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn tail_decreases_in_t() {
        let s = make_stable(1.0).unwrap();
        let a = tail_bound(&s, 0, 1.0, 5.0, 1e-8).unwrap();
        let b = tail_bound(&s, 0, 2.0, 5.0, 1e-8).unwrap();
        assert!(b.value.hi < a.value.hi);
    }
}
