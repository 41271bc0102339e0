//! Complete Bernstein functions: the catalog of Lévy exponents, closure
//! operations, and the two admissibility conditions of the survival formula.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::enclosure::Enclosure;
use crate::quadrature::{integrate, IntegrandSpec};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpecError {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter { name: &'static str, value: f64, reason: &'static str },
    #[error("series truncation cannot reach tolerance {0:e}")]
    Truncation(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `ξ^{α/2}`
    Stable { alpha: f64 },
    /// `(ξ + m^{2/α})^{α/2} − m`
    Relativistic { alpha: f64, m: f64 },
    /// `log(1 + ξ)`
    Log1p,
    /// `1 / log(1 + ξ^{−α/2})`
    InverseLog { alpha: f64 },
    /// `ξ / (1 + ξ)`
    CompoundPoissonLaplace,
    /// `Σ p_k ξ / (a_k + ξ)`, truncated; `remainder` bounds the omitted terms.
    Series { p: Vec<f64>, a: Vec<f64>, remainder: f64 },
    Sum(Vec<(f64, ProcessSpec)>),
    ScaleArg(f64, ProcessSpec),
    ScaleVal(f64, ProcessSpec),
    /// `outer(inner(ξ))`
    Compose(ProcessSpec, ProcessSpec),
}

/// Asymptotic metadata; `None` means not determined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Meta {
    pub is_unbounded: bool,
    pub rv_order_0: Option<f64>,
    pub rv_order_inf: Option<f64>,
    /// Limits of `ξ|ψ''(ξ)|/ψ'(ξ)` as `ξ → 0⁺` and `ξ → ∞`.
    pub curvature_0: Option<f64>,
    pub curvature_inf: Option<f64>,
    /// `β` with `ψ(cξ) = c^β ψ(ξ)` for all `c, ξ > 0`.
    pub homogeneity: Option<f64>,
}

/// A complete Bernstein function `ψ` with analytic derivatives and
/// holomorphic extension to `ℂ \ (−∞, 0]`. Cheap to clone.
#[derive(Clone, Debug, PartialEq)]
pub struct ProcessSpec(Arc<Inner>);

#[derive(Debug, PartialEq)]
struct Inner {
    family: Family,
    meta: Meta,
    name: Option<String>,
}

fn check(name: &'static str, value: f64, ok: bool, reason: &'static str) -> Result<(), SpecError> {
    if ok && value.is_finite() {
        Ok(())
    } else {
        Err(SpecError::InvalidParameter { name, value, reason })
    }
}

/// `log(1 + w)` without cancellation for small `|w|`.
fn c_ln1p(w: Complex64) -> Complex64 {
    if w.norm() < 1e-4 {
        let w2 = w * w;
        w - w2 * 0.5 + w2 * w / 3.0 - w2 * w2 * 0.25
    } else {
        (Complex64::new(1.0, 0.0) + w).ln()
    }
}

/// `exp(w) − 1` without cancellation for small `|w|`.
fn c_expm1(w: Complex64) -> Complex64 {
    if w.norm() < 1e-4 {
        let w2 = w * w;
        w + w2 * 0.5 + w2 * w / 6.0 + w2 * w2 / 24.0
    } else {
        w.exp() - 1.0
    }
}

/// Forces a boundary value into the closed upper half-plane; CBFs map it there,
/// so a negative imaginary part can only be rounding.
fn upper(z: Complex64) -> Complex64 {
    if z.im > 0.0 {
        z
    } else {
        Complex64::new(z.re, 0.0)
    }
}

/// Principal power for a base in the closed upper half-plane.
fn cpow(z: Complex64, p: f64) -> Complex64 {
    if z.im == 0.0 && z.re > 0.0 {
        return Complex64::new(z.re.powf(p), 0.0);
    }
    if z.re == 0.0 && z.im == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let (r, th) = z.to_polar();
    Complex64::from_polar(r.powf(p), th * p)
}

impl ProcessSpec {
    fn build(family: Family, meta: Meta, name: Option<String>) -> Self {
        ProcessSpec(Arc::new(Inner { family, meta, name }))
    }

    pub fn family(&self) -> &Family {
        &self.0.family
    }

    pub fn meta(&self) -> Meta {
        self.0.meta
    }

    /// Canonical descriptor text, when the spec came from the catalog.
    pub fn descriptor(&self) -> Option<&str> {
        self.0.name.as_deref()
    }

    pub(crate) fn with_name(self, name: String) -> Self {
        let inner = Arc::try_unwrap(self.0).unwrap_or_else(|arc| Inner {
            family: arc.family.clone(),
            meta: arc.meta,
            name: arc.name.clone(),
        });
        ProcessSpec(Arc::new(Inner { name: Some(name), ..inner }))
    }

    pub fn is_unbounded(&self) -> bool {
        self.0.meta.is_unbounded
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval3(x).0
    }

    pub fn deriv1(&self, x: f64) -> f64 {
        self.eval3(x).1
    }

    pub fn deriv2(&self, x: f64) -> f64 {
        self.eval3(x).2
    }

    /// `(ψ(x), ψ'(x), ψ''(x))` for `x > 0`.
    pub fn eval3(&self, x: f64) -> (f64, f64, f64) {
        match &self.0.family {
            Family::Stable { alpha } => {
                let b = 0.5 * alpha;
                if b == 1.0 {
                    return (x, 1.0, 0.0);
                }
                let v = x.powf(b);
                (v, b * v / x, b * (b - 1.0) * v / (x * x))
            }
            Family::Relativistic { alpha, m } => {
                let b = 0.5 * alpha;
                let mu = m.powf(1.0 / b);
                let r = x / mu;
                let v = m * (b * r.ln_1p()).exp_m1();
                let base = (x + mu).powf(b - 1.0);
                (v, b * base, b * (b - 1.0) * base / (x + mu))
            }
            Family::Log1p => {
                let d = 1.0 / (1.0 + x);
                (x.ln_1p(), d, -d * d)
            }
            Family::InverseLog { alpha } => {
                let b = 0.5 * alpha;
                let y = x.powf(-b);
                let l = y.ln_1p();
                let q = 1.0 / (x + x * x.powf(b));
                let dq = -(1.0 + (1.0 + b) * x.powf(b)) * q * q;
                let l2 = l * l;
                (1.0 / l, b * q / l2, b * (dq / l2 + 2.0 * b * q * q / (l2 * l)))
            }
            Family::CompoundPoissonLaplace => {
                let d = 1.0 / (1.0 + x);
                (x * d, d * d, -2.0 * d * d * d)
            }
            Family::Series { p, a, .. } => {
                let mut s = (0.0, 0.0, 0.0);
                for (pk, ak) in p.iter().zip(a) {
                    let d = 1.0 / (ak + x);
                    s.0 += pk * x * d;
                    s.1 += pk * ak * d * d;
                    s.2 -= 2.0 * pk * ak * d * d * d;
                }
                s
            }
            Family::Sum(parts) => {
                let mut s = (0.0, 0.0, 0.0);
                for (w, p) in parts {
                    let (v, d1, d2) = p.eval3(x);
                    s.0 += w * v;
                    s.1 += w * d1;
                    s.2 += w * d2;
                }
                s
            }
            Family::ScaleArg(c, p) => {
                let (v, d1, d2) = p.eval3(c * x);
                (v, c * d1, c * c * d2)
            }
            Family::ScaleVal(c, p) => {
                let (v, d1, d2) = p.eval3(x);
                (c * v, c * d1, c * d2)
            }
            Family::Compose(f, g) => {
                let (gv, g1, g2) = g.eval3(x);
                let (fv, f1, f2) = f.eval3(gv);
                (fv, f1 * g1, f2 * g1 * g1 + f1 * g2)
            }
        }
    }

    /// `lim_{ξ→∞} ψ(ξ)`; infinite when `ψ` is unbounded.
    pub fn limit_at_infinity(&self) -> f64 {
        match &self.0.family {
            Family::CompoundPoissonLaplace => 1.0,
            Family::Series { p, .. } => p.iter().sum(),
            Family::Sum(parts) => parts.iter().map(|(w, p)| w * p.limit_at_infinity()).sum(),
            Family::ScaleArg(_, p) => p.limit_at_infinity(),
            Family::ScaleVal(c, p) => c * p.limit_at_infinity(),
            Family::Compose(f, g) => {
                let gl = g.limit_at_infinity();
                if gl.is_finite() {
                    f.eval(gl)
                } else {
                    f.limit_at_infinity()
                }
            }
            Family::Stable { .. } | Family::Relativistic { .. } | Family::Log1p | Family::InverseLog { .. } => {
                f64::INFINITY
            }
        }
    }

    /// Whether the Stieltjes measure of `ψ` may have atoms, i.e. `ψ` has
    /// poles on the negative axis. Compositions inherit the flag.
    pub fn has_atoms(&self) -> bool {
        match &self.0.family {
            Family::CompoundPoissonLaplace | Family::Series { .. } => true,
            Family::Sum(parts) => parts.iter().any(|(_, p)| p.has_atoms()),
            Family::ScaleArg(_, p) | Family::ScaleVal(_, p) => p.has_atoms(),
            Family::Compose(f, g) => f.has_atoms() || g.has_atoms(),
            _ => false,
        }
    }

    /// `ψ(a) − ψ(b)`, avoiding cancellation where `ψ` levels off.
    pub fn difference(&self, a: f64, b: f64) -> f64 {
        match &self.0.family {
            Family::CompoundPoissonLaplace => (a - b) / ((1.0 + a) * (1.0 + b)),
            Family::Series { p, a: ak, .. } => {
                p.iter().zip(ak).map(|(pk, ak)| pk * ak * (a - b) / ((ak + a) * (ak + b))).sum()
            }
            Family::Log1p => {
                let r = (a - b) / (1.0 + b);
                if r.abs() < 0.5 { r.ln_1p() } else { a.ln_1p() - b.ln_1p() }
            }
            Family::Sum(parts) => parts.iter().map(|(w, p)| w * p.difference(a, b)).sum(),
            Family::ScaleArg(c, p) => p.difference(c * a, c * b),
            Family::ScaleVal(c, p) => c * p.difference(a, b),
            Family::Compose(f, g) => {
                let (ga, gb) = (g.eval(a), g.eval(b));
                let dg = g.difference(a, b);
                if dg.abs() < 1e-2 * ga.max(gb) {
                    let mean: f64 = [(0.112_701_665_379_258_31, 5.0 / 18.0), (0.5, 8.0 / 18.0), (0.887_298_334_620_741_7, 5.0 / 18.0)]
                        .iter()
                        .map(|&(u, w)| w * f.deriv1(gb + u * dg))
                        .sum();
                    mean * dg
                } else {
                    f.difference(ga, gb)
                }
            }
            _ => self.eval(a) - self.eval(b),
        }
    }

    /// Holomorphic extension to `ℂ \ (−∞, 0]`. A point `−s + 0i` on the cut is
    /// read as the limit from the upper half-plane, giving `ψ⁺(−s)`.
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        if z.im < 0.0 {
            return self.eval_upper(z.conj()).conj();
        }
        self.eval_upper(Complex64::new(z.re, z.im + 0.0))
    }

    /// Evaluation for `Im z ≥ 0`, with `+0.0` imaginary part on the cut.
    fn eval_upper(&self, z: Complex64) -> Complex64 {
        let v = match &self.0.family {
            Family::Stable { alpha } => {
                let b = 0.5 * alpha;
                if b == 1.0 {
                    z
                } else {
                    cpow(z, b)
                }
            }
            Family::Relativistic { alpha, m } => {
                let b = 0.5 * alpha;
                let mu = m.powf(1.0 / b);
                let w = z / mu;
                if w.norm() < 0.5 {
                    c_expm1(c_ln1p(w) * b) * m
                } else {
                    cpow(z + mu, b) - m
                }
            }
            Family::Log1p => c_ln1p(z),
            Family::InverseLog { alpha } => {
                let b = 0.5 * alpha;
                let y = if z.im == 0.0 && z.re > 0.0 {
                    Complex64::new(z.re.powf(-b), 0.0)
                } else {
                    let (r, th) = z.to_polar();
                    Complex64::from_polar(r.powf(-b), -th * b)
                };
                let l = c_ln1p(y);
                Complex64::from_polar(l.norm().recip(), -l.arg())
            }
            Family::CompoundPoissonLaplace => z / (z + 1.0),
            Family::Series { p, a, .. } => p.iter().zip(a).map(|(pk, ak)| z * *pk / (z + *ak)).sum(),
            Family::Sum(parts) => parts.iter().map(|(w, p)| p.eval_upper(z) * *w).sum(),
            Family::ScaleArg(c, p) => p.eval_upper(z * *c),
            Family::ScaleVal(c, p) => p.eval_upper(z) * *c,
            Family::Compose(f, g) => f.eval_upper(g.eval_upper(z)),
        };
        upper(v)
    }

    /// `ψ⁺(−s)`, the boundary value from above at the negative real `−s`.
    pub fn boundary(&self, s: f64) -> Complex64 {
        self.eval_complex(Complex64::new(-s, 0.0))
    }

    /// `Ψ(ξ) = ψ(ξ²)`.
    pub fn exponent(&self, xi: f64) -> f64 {
        self.eval(xi * xi)
    }

    /// `lim_{ξ→0⁺} (ξ/ψ(ξ))^{1/2}`, nonzero only when `ψ` is asymptotically linear at 0.
    pub fn drift_coefficient(&self) -> Enclosure {
        if let Family::Series { p, a, .. } = &self.0.family {
            let slope: f64 = p.iter().zip(a).map(|(pk, ak)| pk / ak).sum();
            return Enclosure::point(slope.sqrt().recip());
        }
        match self.0.meta.rv_order_0 {
            Some(r) if r < 1.0 => Enclosure::exact(0.0),
            _ => {
                let a = (1e-12 / self.eval(1e-12)).sqrt();
                let b = (1e-10 / self.eval(1e-10)).sqrt();
                if !(a.is_finite() && b.is_finite()) {
                    return Enclosure::exact(0.0);
                }
                // the quotient is monotone in ξ; extrapolate linearly in ξ to 0
                let lim = a + (a - b) * 1e-12 / (1e-10 - 1e-12);
                Enclosure::hull_of(a, lim).inflate(4.0 * (a - b).abs() * 1e-2 + 1e-15 * a)
            }
        }
    }

    /// Truncation bound of the series family, zero otherwise.
    pub fn truncation_bound(&self) -> f64 {
        match &self.0.family {
            Family::Series { remainder, .. } => *remainder,
            _ => 0.0,
        }
    }
}

impl fmt::Display for ProcessSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0.name {
            Some(n) => f.write_str(n),
            None => write!(f, "{:?}", self.0.family),
        }
    }
}

fn fmt_num(x: f64) -> String {
    format!("{x}")
}

pub fn make_stable(alpha: f64) -> Result<ProcessSpec, SpecError> {
    check("alpha", alpha, alpha > 0.0 && alpha <= 2.0, "must lie in (0, 2]")?;
    let b = alpha / 2.0;
    let meta = Meta {
        is_unbounded: true,
        rv_order_0: Some(b),
        rv_order_inf: Some(b),
        curvature_0: Some(1.0 - b),
        curvature_inf: Some(1.0 - b),
        homogeneity: Some(b),
    };
    Ok(ProcessSpec::build(Family::Stable { alpha }, meta, Some(format!("family=stable alpha={}", fmt_num(alpha)))))
}

/// `ψ(ξ) = ξ`.
pub fn brownian() -> ProcessSpec {
    make_stable(2.0).expect("valid").with_name("family=brownian".into())
}

pub fn make_relativistic(alpha: f64, m: f64) -> Result<ProcessSpec, SpecError> {
    check("alpha", alpha, alpha > 0.0 && alpha < 2.0, "must lie in (0, 2)")?;
    check("m", m, m > 0.0, "must be positive")?;
    let b = alpha / 2.0;
    let meta = Meta {
        is_unbounded: true,
        rv_order_0: Some(1.0),
        rv_order_inf: Some(b),
        curvature_0: Some(0.0),
        curvature_inf: Some(1.0 - b),
        homogeneity: None,
    };
    let name = format!("family=relativistic alpha={} m={}", fmt_num(alpha), fmt_num(m));
    Ok(ProcessSpec::build(Family::Relativistic { alpha, m }, meta, Some(name)))
}

fn log1p_spec() -> ProcessSpec {
    let meta = Meta {
        is_unbounded: true,
        rv_order_0: Some(1.0),
        rv_order_inf: Some(0.0),
        curvature_0: Some(0.0),
        curvature_inf: Some(1.0),
        homogeneity: None,
    };
    ProcessSpec::build(Family::Log1p, meta, None)
}

/// `ψ(ξ) = log(1 + ξ)`.
pub fn make_variance_gamma() -> ProcessSpec {
    log1p_spec().with_name("family=variance-gamma".into())
}

/// `ψ(ξ) = log(1 + ξ^{α/2})`.
pub fn make_geometric_stable(alpha: f64) -> Result<ProcessSpec, SpecError> {
    let inner = make_stable(alpha)?;
    Ok(combine(Combinator::Compose, &[log1p_spec(), inner], &[])?
        .with_name(format!("family=geometric-stable alpha={}", fmt_num(alpha))))
}

/// `ψ = log(1+·)` applied `depth` times to `ξ^{α/2}`.
pub fn make_iterated_geometric(alpha: f64, depth: u32) -> Result<ProcessSpec, SpecError> {
    check("depth", depth as f64, (1..=8).contains(&depth), "must lie in 1..=8")?;
    let mut s = make_stable(alpha)?;
    for _ in 0..depth {
        s = combine(Combinator::Compose, &[log1p_spec(), s], &[])?;
    }
    Ok(s.with_name(format!("family=iterated-geometric alpha={} depth={}", fmt_num(alpha), depth)))
}

/// `ψ(ξ) = 1 / log(1 + ξ^{−α/2})`.
pub fn make_inverse_log(alpha: f64) -> Result<ProcessSpec, SpecError> {
    check("alpha", alpha, alpha > 0.0 && alpha <= 2.0, "must lie in (0, 2]")?;
    let b = alpha / 2.0;
    let meta = Meta {
        is_unbounded: true,
        rv_order_0: Some(0.0),
        rv_order_inf: Some(b),
        curvature_0: Some(1.0),
        curvature_inf: Some(1.0 - b),
        homogeneity: None,
    };
    Ok(ProcessSpec::build(Family::InverseLog { alpha }, meta, Some(format!("family=inverse-log alpha={}", fmt_num(alpha)))))
}

/// `ψ(ξ) = log(1 + 1/log(1 + 1/ξ))`.
pub fn make_log_inverse_log() -> ProcessSpec {
    let inner = make_inverse_log(2.0).expect("valid");
    combine(Combinator::Compose, &[log1p_spec(), inner], &[])
        .expect("valid")
        .with_name("family=log-inverse-log".into())
}

/// `ψ(ξ) = ((ξ + 1)^{α/β} − 1)^{β/2}`, `0 < α < β ≤ 2`.
pub fn make_subordinate_relativistic(alpha: f64, beta: f64) -> Result<ProcessSpec, SpecError> {
    check("alpha", alpha, alpha > 0.0 && alpha <= 2.0, "must lie in (0, 2]")?;
    check("beta", beta, beta > alpha && beta <= 2.0, "must satisfy alpha < beta <= 2")?;
    let inner = make_relativistic(2.0 * alpha / beta, 1.0)?;
    let outer = make_stable(beta)?;
    Ok(combine(Combinator::Compose, &[outer, inner], &[])?.with_name(format!(
        "family=subordinate-relativistic alpha={} beta={}",
        fmt_num(alpha),
        fmt_num(beta)
    )))
}

/// `ψ(ξ) = ξ/(1 + ξ)`: compound Poisson process with Laplace-distributed jumps.
pub fn make_compound_poisson_laplace() -> ProcessSpec {
    let meta = Meta {
        is_unbounded: false,
        rv_order_0: Some(1.0),
        rv_order_inf: Some(0.0),
        curvature_0: Some(0.0),
        curvature_inf: Some(2.0),
        homogeneity: None,
    };
    ProcessSpec::build(Family::CompoundPoissonLaplace, meta, Some("family=compound-poisson-laplace".into()))
}

/// `ψ(ξ) = Σ_{k≥1} ξ/(k!·(1/(k!)² + ξ))`, truncated once the omitted weights
/// `Σ_{k>K} 1/k!` drop below `tol`.
pub fn make_series_irregular(tol: f64) -> Result<ProcessSpec, SpecError> {
    check("tol", tol, tol > 0.0, "must be positive")?;
    let mut p = Vec::new();
    let mut a = Vec::new();
    let mut fact = 1.0f64;
    let mut k = 1u32;
    loop {
        fact *= k as f64;
        if !(fact * fact).is_finite() {
            return Err(SpecError::Truncation(tol));
        }
        p.push(1.0 / fact);
        a.push(1.0 / (fact * fact));
        // Σ_{j>k} 1/j! ≤ (1/(k+1)!)·(k+2)/(k+1)
        let rem = (k as f64 + 2.0) / ((k as f64 + 1.0) * fact * (k as f64 + 1.0));
        if rem < tol {
            let meta = Meta {
                is_unbounded: false,
                rv_order_0: None,
                rv_order_inf: Some(0.0),
                curvature_0: None,
                curvature_inf: Some(2.0),
                homogeneity: None,
            };
            return Ok(ProcessSpec::build(
                Family::Series { p, a, remainder: rem },
                meta,
                Some("family=series-irregular".into()),
            ));
        }
        k += 1;
    }
}

/// Closure operations on complete Bernstein functions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Combinator {
    /// `Σ c_i ψ_i` (weights in `constants`, default 1).
    Sum,
    /// `ψ(c ξ)`
    ScaleArg,
    /// `c ψ(ξ)`
    ScaleVal,
    /// `specs[0] ∘ specs[1]`
    Compose,
}

pub fn combine(op: Combinator, specs: &[ProcessSpec], constants: &[f64]) -> Result<ProcessSpec, SpecError> {
    for &c in constants {
        check("constant", c, c > 0.0, "must be positive")?;
    }
    match op {
        Combinator::Sum => {
            check("parts", specs.len() as f64, !specs.is_empty(), "sum needs at least one part")?;
            let weights: Vec<f64> = if constants.is_empty() { vec![1.0; specs.len()] } else { constants.to_vec() };
            check("weights", weights.len() as f64, weights.len() == specs.len(), "one weight per part")?;
            let metas: Vec<Meta> = specs.iter().map(|s| s.meta()).collect();
            let all = |f: fn(&Meta) -> Option<f64>| metas.iter().map(f).collect::<Option<Vec<f64>>>();
            let rv0 = all(|m| m.rv_order_0).map(|v| v.iter().cloned().fold(f64::INFINITY, f64::min));
            let rvi = all(|m| m.rv_order_inf).map(|v| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
            let dominant = |orders: Option<Vec<f64>>, pick_min: bool, curv: fn(&Meta) -> Option<f64>| -> Option<f64> {
                let o = orders?;
                let target = if pick_min {
                    o.iter().cloned().fold(f64::INFINITY, f64::min)
                } else {
                    o.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                };
                let idx: Vec<usize> = (0..o.len()).filter(|&i| o[i] == target).collect();
                let c: Option<Vec<f64>> = idx.iter().map(|&i| curv(&metas[i])).collect();
                let c = c?;
                if c.iter().all(|&x| x == c[0]) {
                    Some(c[0])
                } else {
                    None
                }
            };
            let homog = all(|m| m.homogeneity).and_then(|h| if h.iter().all(|&x| x == h[0]) { Some(h[0]) } else { None });
            let meta = Meta {
                is_unbounded: metas.iter().any(|m| m.is_unbounded),
                rv_order_0: rv0,
                rv_order_inf: rvi,
                curvature_0: dominant(all(|m| m.rv_order_0), true, |m| m.curvature_0),
                curvature_inf: dominant(all(|m| m.rv_order_inf), false, |m| m.curvature_inf),
                homogeneity: homog,
            };
            let parts = weights.into_iter().zip(specs.iter().cloned()).collect();
            Ok(ProcessSpec::build(Family::Sum(parts), meta, None))
        }
        Combinator::ScaleArg | Combinator::ScaleVal => {
            check("specs", specs.len() as f64, specs.len() == 1, "scaling takes one spec")?;
            check("constants", constants.len() as f64, constants.len() == 1, "scaling takes one constant")?;
            let c = constants[0];
            let s = specs[0].clone();
            let meta = s.meta();
            let family = if op == Combinator::ScaleArg { Family::ScaleArg(c, s) } else { Family::ScaleVal(c, s) };
            Ok(ProcessSpec::build(family, meta, None))
        }
        Combinator::Compose => {
            check("specs", specs.len() as f64, specs.len() == 2, "compose takes [outer, inner]")?;
            let (f, g) = (specs[0].meta(), specs[1].meta());
            let prod = |a: Option<f64>, b: Option<f64>| Some(a? * b?);
            let meta = Meta {
                is_unbounded: f.is_unbounded && g.is_unbounded,
                rv_order_0: prod(f.rv_order_0, g.rv_order_0),
                rv_order_inf: if g.is_unbounded { prod(f.rv_order_inf, g.rv_order_inf) } else { Some(0.0) },
                curvature_0: (|| Some(f.curvature_0? * g.rv_order_0? + g.curvature_0?))(),
                curvature_inf: if g.is_unbounded {
                    (|| Some(f.curvature_inf? * g.rv_order_inf? + g.curvature_inf?))()
                } else {
                    g.curvature_inf
                },
                homogeneity: prod(f.homogeneity, g.homogeneity),
            };
            Ok(ProcessSpec::build(Family::Compose(specs[0].clone(), specs[1].clone()), meta, None))
        }
    }
}

/// The named families used throughout the tests and the acceptance suite.
pub fn catalog() -> Vec<ProcessSpec> {
    let sum = combine(Combinator::Sum, &[make_stable(0.5).unwrap(), make_stable(1.5).unwrap()], &[1.0, 2.0])
        .unwrap()
        .with_name("family=sum parts=stable:0.5,stable:1.5 weights=1,2".into());
    vec![
        brownian(),
        make_stable(0.5).unwrap(),
        make_stable(1.0).unwrap(),
        make_stable(1.5).unwrap(),
        sum,
        make_relativistic(1.0, 1.0).unwrap(),
        make_subordinate_relativistic(1.0, 2.0).unwrap(),
        make_variance_gamma(),
        make_geometric_stable(1.0).unwrap(),
        make_inverse_log(1.0).unwrap(),
        make_log_inverse_log(),
        make_iterated_geometric(2.0, 2).unwrap(),
        make_compound_poisson_laplace(),
        make_series_irregular(1e-18).unwrap(),
    ]
}

/// Result of checking `sup ξ|ψ''(ξ)|/ψ'(ξ) < 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionA1 {
    pub sup_estimate: f64,
    pub passes: bool,
    /// `sup·π/4`, an upper bound for every phase shift.
    pub theta_bound: f64,
    pub inf_estimate: f64,
}

pub const A1_MARGIN: f64 = 1e-9;

/// Log-spaced sample points on `[lo, hi]`.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..n).map(|i| (a + (b - a) * i as f64 / (n - 1).max(1) as f64).exp()).collect()
}

/// Evaluates the curvature ratio on `grid` plus the analytic endpoint limits.
pub fn check_condition_a1(spec: &ProcessSpec, grid: &[f64]) -> ConditionA1 {
    let mut sup: f64 = 0.0;
    let mut inf = f64::INFINITY;
    for &x in grid {
        let (_, d1, d2) = spec.eval3(x);
        let r = x * d2.abs() / d1;
        if r.is_finite() {
            sup = sup.max(r);
            inf = inf.min(r);
        }
    }
    let m = spec.meta();
    for r in [m.curvature_0, m.curvature_inf].into_iter().flatten() {
        sup = sup.max(r);
        inf = inf.min(r);
    }
    let passes = sup < 2.0 - A1_MARGIN;
    ConditionA1 { sup_estimate: sup, passes, theta_bound: sup * std::f64::consts::FRAC_PI_4, inf_estimate: inf }
}

/// Default grid: 512 log-spaced points on `[1e-8, 1e8]`.
pub fn check_condition_a1_default(spec: &ProcessSpec) -> ConditionA1 {
    check_condition_a1(spec, &log_grid(1e-8, 1e8, 512))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConditionA2 {
    pub integral: Enclosure,
    pub passes: bool,
    /// Local power-law decay exponent of the integrand in `u = log ξ` at the cutoff.
    pub decay_exponent: f64,
}

/// Checks `∫₁^∞ √(ψ'(ξ²)/ψ(ξ²)) e^{−t₀ψ(ξ²)} dξ < ∞`.
///
/// The integral is computed in `u = log ξ` up to `u = 300`; beyond that the
/// integrand is assumed to follow the power law `u^{−p}` fitted on
/// `[150, 300]`. The condition fails when `p < 1.2`, which flags logarithmic
/// divergence like the iterated-logarithm example at `t₀ = 1/2`.
pub fn check_condition_a2(spec: &ProcessSpec, t0: f64, tol: f64) -> ConditionA2 {
    const U_MAX: f64 = 300.0;
    let h = |u: f64| -> f64 {
        let x = (2.0 * u).exp();
        let (v, d1, _) = spec.eval3(x);
        (x * d1 / v).sqrt() * (-t0 * v).exp()
    };
    let r = integrate(&IntegrandSpec::finite(h, 0.0, U_MAX).with_breaks((1..30).map(|i| i as f64 * 10.0)), tol, 20_000);
    let (h1, h2) = (h(U_MAX / 2.0), h(U_MAX));
    let p = if h2 > 0.0 && h1 > 0.0 { (h1 / h2).ln() / 2f64.ln() } else { f64::INFINITY };
    let passes = r.converged && p >= 1.2;
    let tail = if h2 == 0.0 { 0.0 } else if p > 1.0 { h2 * U_MAX / (p - 1.0) } else { f64::INFINITY };
    ConditionA2 { integral: r.value + Enclosure::new(0.0, tail), passes, decay_exponent: p }
}
