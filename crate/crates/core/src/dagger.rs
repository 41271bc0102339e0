//! The Wiener–Hopf factor `ψ†`, the difference-quotient family `ψ_λ`, and
//! `ψ_λ†`.
//!
//! On the positive half-line both transforms are computed from
//!
//! `log ψ†(ξ) = ½ log ψ(ξ²) + (1/π) ∫₀^∞ [log ψ(ξ²e^{−2v}) + log ψ(ξ²e^{2v}) − 2 log ψ(ξ²)] / (2 cosh v) dv`,
//!
//! obtained from the Poisson-kernel average by folding `ζ ↦ 1/ζ` and
//! substituting `ζ = e^{−v}`. Since `ψ(cξ)/ψ(ξ)` lies between `min(1, c)` and
//! `max(1, c)`, the bracket is at most `4v` in modulus, which gives the
//! certified tail `2(V + 1)e^{−V}/π`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cbf::ProcessSpec;
use crate::enclosure::Enclosure;
use crate::error::{FptError, Result};
use crate::quadrature::{integrate, Domain, IntegrandSpec, QuadratureResult, Tail};
use crate::special::CATALAN;

/// `e^{2𝒞/π}`, the universal ratio bound between `ψ†(ξ)` and `√ψ(ξ²)`.
pub fn sandwich_factor() -> f64 {
    (2.0 * CATALAN / PI).exp()
}

/// Relative radius around `λ²` inside which `ψ_λ` switches to the averaged-derivative form.
pub const DIAGONAL_RADIUS: f64 = 1e-2;

const BUDGET: usize = 4000;

/// Three-point Gauss–Legendre nodes and weights on `[0, 1]`.
const G3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_31, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

/// `ψ_λ(ξ) = (1 − ξ/λ²)/(1 − ψ(ξ)/ψ(λ²))` for one fixed `λ`.
#[derive(Clone, Debug)]
pub struct PsiLambda<'a> {
    spec: &'a ProcessSpec,
    lambda: f64,
    a: f64,
    pa: f64,
    da: f64,
    scale: f64,
}

impl<'a> PsiLambda<'a> {
    pub fn new(spec: &'a ProcessSpec, lambda: f64) -> Self {
        let a = lambda * lambda;
        let (pa, da, _) = spec.eval3(a);
        PsiLambda { spec, lambda, a, pa, da, scale: pa / a }
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn spec(&self) -> &'a ProcessSpec {
        self.spec
    }

    /// `ψ(λ²)`.
    pub fn psi_at_diagonal(&self) -> f64 {
        self.pa
    }

    /// `ψ'(λ²)`.
    pub fn dpsi_at_diagonal(&self) -> f64 {
        self.da
    }

    /// `ψ_λ(λ²) = ψ(λ²)/(λ²ψ'(λ²))`.
    pub fn diagonal(&self) -> f64 {
        self.scale / self.da
    }

    /// Difference quotient `(ψ(ξ) − ψ(λ²))/(ξ − λ²)`; near the diagonal it is
    /// the mean of `ψ'` over `[λ², ξ]`, computed by 3-point Gauss.
    fn quotient(&self, xi: f64) -> f64 {
        let h = xi - self.a;
        if h.abs() <= DIAGONAL_RADIUS * self.a {
            if h == 0.0 {
                return self.da;
            }
            G3.iter().map(|&(u, w)| w * self.spec.deriv1(self.a + u * h)).sum()
        } else {
            self.spec.difference(xi, self.a) / h
        }
    }

    pub fn eval(&self, xi: f64) -> f64 {
        if xi == 0.0 {
            return 1.0;
        }
        self.scale / self.quotient(xi)
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        if z.im == 0.0 && z.re >= 0.0 {
            return Complex64::new(self.eval(z.re), 0.0);
        }
        (z - self.a) * self.scale / (self.spec.eval_complex(z) - self.pa)
    }
}

/// `ψ_λ(ξ)` with its continuous extension `ψ(λ²)/(λ²ψ'(λ²))` at `ξ = λ²`.
pub fn psi_lambda(spec: &ProcessSpec, lambda: f64, xi: f64) -> f64 {
    PsiLambda::new(spec, lambda).eval(xi)
}

/// Folded log-ratio integral for a positive function with logarithm `logf`,
/// evaluated at `x2 = ξ²`; returns `log f†(ξ) − ½ log f(ξ²)` and the raw result.
fn log_excess(logf: &dyn Fn(f64) -> f64, x2: f64, tol: f64) -> QuadratureResult {
    let l0 = logf(x2);
    let eval = move |v: f64| -> Enclosure {
        let e = (2.0 * v).exp();
        let lm = logf(x2 / e);
        let lp = logf(x2 * e);
        let c = PI * 2.0 * v.cosh();
        let val = (lm + lp - 2.0 * l0) / c;
        let rad = 8.0 * f64::EPSILON * (lm.abs() + lp.abs() + 2.0 * l0.abs()) / c;
        Enclosure::around(val, rad)
    };
    let tail = Tail { bound: Box::new(|v: f64| 2.0 * (v + 1.0) * (-v).exp() / PI), nonnegative: false };
    let spec = IntegrandSpec::new(eval, Domain::SemiInfinite(0.0, tail)).with_breaks([0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0]);
    integrate(&spec, tol, BUDGET)
}

fn dagger_of_log(logf: &dyn Fn(f64) -> f64, xi: f64, tol: f64, what: &'static str) -> Result<Enclosure> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(FptError::InvalidInput(format!("{what} needs a positive argument, got {xi}")));
    }
    let x2 = xi * xi;
    let half = Enclosure::point(0.5 * logf(x2));
    let r = log_excess(logf, x2, 0.5 * tol);
    let ex = r.require(what, 0.5 * tol, 4.0)?;
    Ok((half + ex).exp())
}

/// `ψ†(ξ)` for `ξ > 0`. `tol` bounds the relative width of the result.
pub fn dagger(spec: &ProcessSpec, xi: f64, tol: f64) -> Result<Enclosure> {
    dagger_of_log(&|s: f64| spec.eval(s).ln(), xi, tol, "dagger")
}

/// `ψ_λ†(ξ)` for `ξ > 0`. `tol` bounds the relative width of the result.
pub fn psi_lambda_dagger(spec: &ProcessSpec, lambda: f64, xi: f64, tol: f64) -> Result<Enclosure> {
    let pl = PsiLambda::new(spec, lambda);
    psi_lambda_dagger_with(&pl, xi, tol)
}

pub fn psi_lambda_dagger_with(pl: &PsiLambda<'_>, xi: f64, tol: f64) -> Result<Enclosure> {
    dagger_of_log(&|s: f64| pl.eval(s).ln(), xi, tol, "psi_lambda dagger")
}

/// Rectangular complex enclosure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ComplexEnclosure {
    pub re: Enclosure,
    pub im: Enclosure,
}

impl ComplexEnclosure {
    pub fn center(&self) -> Complex64 {
        Complex64::new(self.re.mid(), self.im.mid())
    }

    /// Radius of a disc around `center` containing the rectangle.
    pub fn radius(&self) -> f64 {
        self.re.rad().hypot(self.im.rad())
    }

    pub fn contains(&self, z: Complex64) -> bool {
        self.re.contains(z.re) && self.im.contains(z.im)
    }

    fn disc(c: Complex64, r: f64) -> Self {
        ComplexEnclosure { re: Enclosure::around(c.re, r), im: Enclosure::around(c.im, r) }
    }
}

/// `ψ_λ†(iλ)`, returned in polar form.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PolarEnclosure {
    pub modulus: Enclosure,
    pub argument: Enclosure,
}

/// `ψ_λ†(iλ)`: the modulus is `√ψ_λ(λ²)` by the factorisation identity and
/// the argument is the phase shift `ϑ_λ`.
pub fn psi_lambda_dagger_imaginary(spec: &ProcessSpec, lambda: f64, tol: f64) -> Result<PolarEnclosure> {
    let pl = PsiLambda::new(spec, lambda);
    let modulus = Enclosure::point(pl.diagonal().sqrt());
    let argument = crate::spectral::phase_shift(spec, lambda, tol)?;
    Ok(PolarEnclosure { modulus, argument })
}

/// `ψ†(w)` for `Re w > 0` from the Poisson-kernel integral with complex kernel.
fn dagger_right(spec: &ProcessSpec, w: Complex64, tol: f64) -> Result<ComplexEnclosure> {
    let (rho, th) = w.to_polar();
    let x2 = rho * rho;
    let l0 = spec.eval(x2).ln();
    let e = Complex64::from_polar(1.0, th);
    let e2 = e * e;
    let f = move |v: f64| -> Complex64 {
        let (ep, em) = (v.exp(), (-v).exp());
        let k1 = e / (e2 * ep + em);
        let k2 = e / (e2 * em + ep);
        let lm = spec.eval(x2 * em * em).ln() - l0;
        let lp = spec.eval(x2 * ep * ep).ln() - l0;
        (k1 * lm + k2 * lp) / PI
    };
    let tail = |v: f64| if v < 3.0 { f64::INFINITY } else { 4.2 * (v + 1.0) * (-v).exp() / PI };
    let breaks = [0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
    let part = |pick: fn(Complex64) -> f64| -> Result<Enclosure> {
        let ev = move |v: f64| {
            let z = f(v);
            Enclosure::around(pick(z), 16.0 * f64::EPSILON * (z.norm() + l0.abs() / PI))
        };
        let spec = IntegrandSpec::new(ev, Domain::SemiInfinite(0.0, Tail { bound: Box::new(tail), nonnegative: false }))
            .with_breaks(breaks);
        integrate(&spec, 0.25 * tol, BUDGET).require("complex dagger", 0.25 * tol, 4.0)
    };
    let re = part(|z| z.re)? + 0.5 * l0;
    let im = part(|z| z.im)?;
    let c = Complex64::new(re.mid(), im.mid()).exp();
    let r = re.rad().hypot(im.rad());
    Ok(ComplexEnclosure::disc(c, c.norm() * (r.exp() - 1.0) + 4.0 * f64::EPSILON * c.norm()))
}

/// `ψ†(w)` off the negative axis from the Stieltjes representation
/// `ψ†(w) = c₁ + c₂w + (1/π)∫₀^∞ (w/(w+s)) Im ψ⁺(−s²) / ψ†(s) ds/s`,
/// whose boundary density follows from `ψ†(s)ψ†(−s) = ψ(−s²)`.
///
/// The integral runs over `log s ∈ [−80, 80]` with power-law tail estimates,
/// so it is not certified for slowly varying `ψ`. Atoms of the boundary
/// measure are not representable by a density and are rejected.
fn dagger_stieltjes(spec: &ProcessSpec, w: Complex64, tol: f64) -> Result<ComplexEnclosure> {
    const U: f64 = 80.0;
    if spec.has_atoms() {
        return Err(FptError::Unsupported(format!("Stieltjes route needs an atomless boundary measure ({spec})")));
    }
    let meta = spec.meta();
    let c1 = match meta.rv_order_0 {
        Some(r) if r > 0.0 => 0.0,
        _ => spec.eval(1e-300).sqrt(),
    };
    let c2 = match meta.rv_order_inf {
        Some(r) if r < 1.0 => 0.0,
        _ => (spec.eval(1e200) / 1e200).sqrt(),
    };
    let inner_tol = 1e-3 * tol;
    let f = |u: f64| -> Result<(Complex64, f64)> {
        let s = u.exp();
        let im = spec.boundary(s * s).im;
        if im == 0.0 {
            return Ok((Complex64::new(0.0, 0.0), 0.0));
        }
        let d = dagger(spec, s, inner_tol)?;
        let z = w / (w + s) * (im / (PI * d.mid()));
        Ok((z, z.norm() * (d.rad() / d.mid() + 8.0 * f64::EPSILON)))
    };
    let err_cell: std::cell::RefCell<Option<FptError>> = std::cell::RefCell::new(None);
    let eval_pick = |u: f64, pick: fn(Complex64) -> f64| -> Enclosure {
        match f(u) {
            Ok((z, r)) => Enclosure::around(pick(z), r),
            Err(e) => {
                let mut slot = err_cell.borrow_mut();
                if slot.is_none() {
                    *slot = Some(e);
                }
                Enclosure::new(f64::NEG_INFINITY, f64::INFINITY)
            }
        }
    };
    let tail_at = |u: f64, inward: f64| -> Result<f64> {
        let (a, _) = f(u)?;
        let (b, _) = f(u + inward)?;
        let rate = (b.norm() / a.norm()).ln() / inward.abs();
        Ok(if a.norm() == 0.0 { 0.0 } else if rate > 0.0 { 2.0 * a.norm() / rate } else { f64::INFINITY })
    };
    let lw = w.norm().ln();
    let part = |pick: fn(Complex64) -> f64| -> QuadratureResult {
        let spec = IntegrandSpec::new(move |u| eval_pick(u, pick), Domain::Finite(-U, U))
            .with_breaks((-16..=16).map(|k| 5.0 * k as f64).chain([lw]));
        integrate(&spec, 0.4 * tol, BUDGET)
    };
    let re = part(|z| z.re);
    let im = part(|z| z.im);
    if let Some(e) = err_cell.borrow_mut().take() {
        return Err(e);
    }
    let t = tail_at(U, -1.0)? + tail_at(-U, 1.0)?;
    let re = re.require("stieltjes dagger", 0.4 * tol, 4.0)?.inflate(t) + (c1 + c2 * w.re);
    let im = im.require("stieltjes dagger", 0.4 * tol, 4.0)?.inflate(t) + c2 * w.im;
    Ok(ComplexEnclosure { re, im })
}

/// `ψ†(z)` at a complex point off `(−∞, 0]`. `tol` bounds the absolute width
/// for the Stieltjes route and the relative width for the kernel route.
pub fn dagger_complex(spec: &ProcessSpec, z: Complex64, tol: f64) -> Result<ComplexEnclosure> {
    if z.re > 0.0 {
        dagger_right(spec, z, tol)
    } else if z.im != 0.0 {
        dagger_stieltjes(spec, z, tol)
    } else {
        Err(FptError::InvalidInput(format!("dagger is not defined on the negative axis, got {z}")))
    }
}

/// Encloses `|ψ†(z)ψ†(−z) − ψ(−z²)|`. The factor on the right half-plane uses
/// the kernel integral and the other the Stieltjes representation, so the two
/// factors come from independent routes.
pub fn duality_residual(spec: &ProcessSpec, z: Complex64, tol: f64) -> Result<Enclosure> {
    if z.im == 0.0 {
        return Err(FptError::InvalidInput("duality check needs Im z != 0".into()));
    }
    let (a, b) = if z.re > 0.0 {
        (dagger_right(spec, z, tol)?, dagger_stieltjes(spec, -z, tol)?)
    } else if z.re < 0.0 {
        (dagger_stieltjes(spec, z, tol)?, dagger_right(spec, -z, tol)?)
    } else {
        (dagger_stieltjes(spec, z, tol)?, dagger_stieltjes(spec, -z, tol)?)
    };
    let p = spec.eval_complex(-z * z);
    let (ac, bc) = (a.center(), b.center());
    let (ra, rb) = (a.radius(), b.radius());
    let c = ac * bc - p;
    let r = ac.norm() * rb + bc.norm() * ra + ra * rb + 8.0 * f64::EPSILON * (ac.norm() * bc.norm() + p.norm());
    let m = c.norm();
    Ok(Enclosure::new((m - r).max(0.0), m + r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbf::{brownian, combine, make_stable, Combinator};

    #[test]
    fn identity_is_fixed() {
        let d = dagger(&brownian(), 2.0, 1e-12).unwrap();
        assert!(d.contains(2.0), "{d}");
    }

    #[test]
    fn stable_power_law() {
        let d = dagger(&make_stable(1.0).unwrap(), 4.0, 1e-12).unwrap();
        assert!(d.contains(2.0), "{d}");
    }

    #[test]
    fn value_scaling() {
        let s = combine(Combinator::ScaleVal, &[brownian()], &[4.0]).unwrap();
        let d = dagger(&s, 3.0, 1e-12).unwrap();
        assert!(d.contains(6.0), "{d}");
    }

    #[test]
    fn psi_lambda_values() {
        let s = make_stable(1.0).unwrap();
        assert!((psi_lambda(&s, 1.0, 4.0) - 3.0).abs() < 1e-14);
        assert_eq!(psi_lambda(&s, 1.0, 0.0), 1.0);
        assert!((psi_lambda(&brownian(), 2.0, 3.0) - 1.0).abs() < 1e-15);
        // continuity across the switch radius
        let inside = psi_lambda(&s, 1.0, 1.0 + 0.999 * DIAGONAL_RADIUS);
        let outside = psi_lambda(&s, 1.0, 1.0 + 1.001 * DIAGONAL_RADIUS);
        assert!((inside - outside).abs() < 1e-5);
        assert!((psi_lambda(&s, 1.0, 1.0) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn duality_identity_function() {
        let r = duality_residual(&brownian(), Complex64::new(1.0, 1.0), 1e-8).unwrap();
        assert!(r.contains(0.0), "{r}");
    }
}
