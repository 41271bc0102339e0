//! Phase shift `ϑ_λ`, correction measure `γ_λ`, eigenfunctions
//! `F_λ(x) = sin(λx + ϑ_λ) − G_λ(x)`, and the renewal function `V`.
//!
//! `γ_λ` is stored as a discrete measure: its density is sampled at the
//! Gauss–Kronrod nodes of fixed panels in `s = log(ξ/λ)`, keeping both the
//! Kronrod and the embedded Gauss weights. Any transform `Σ w_j k(ξ_j)` of
//! the measure then carries a per-panel error estimate from the difference of
//! the two rules.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::sync::{Arc, Mutex, OnceLock};

use crate::cbf::{check_condition_a1_default, ProcessSpec};
use crate::dagger::{dagger, psi_lambda_dagger_with, PsiLambda};
use crate::enclosure::Enclosure;
use crate::error::{FptError, Result};
use crate::quadrature::{integrate, kronrod_panel, Domain, IntegrandSpec, Removable, Tail};

const BUDGET: usize = 4000;

/// `ϑ_λ = (1/π)∫₀¹ (1−ζ²)^{-1} log(ψ_λ(λ²/ζ²)/ψ_λ(λ²ζ²)) dζ`, integrated in
/// `v = −log ζ`. The integrand is even in `v` with limit
/// `λ²|ψ''(λ²)|/(πψ'(λ²))` at `v = 0`.
pub fn phase_shift(spec: &ProcessSpec, lambda: f64, tol: f64) -> Result<Enclosure> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(FptError::InvalidInput(format!("lambda must be positive, got {lambda}")));
    }
    let pl = PsiLambda::new(spec, lambda);
    let a = lambda * lambda;
    let f = |v: f64| -> f64 {
        let e = (2.0 * v).exp();
        (pl.eval(a * e).ln() - pl.eval(a / e).ln()) / (PI * 2.0 * v.sinh())
    };
    let (_, d1, d2) = spec.eval3(a);
    let limit = a * d2.abs() / d1 / PI;
    const R: f64 = 3e-4;
    let fr = f(R);
    let near = Enclosure::hull_of(limit, fr).inflate((fr - limit).abs() + 1e-14 * limit.abs() + 1e-300);
    let ev = |v: f64| Enclosure::around(f(v), 1e-15 / v.max(1e-3));
    let tail = Tail { bound: Box::new(|v: f64| 4.0 * (v + 1.0) * (-v).exp() / (PI * (1.0 - (-2.0 * v).exp()))), nonnegative: true };
    let is = IntegrandSpec::new(ev, Domain::SemiInfinite(0.0, tail))
        .with_removable(Removable { at: 0.0, radius: R, value: near })
        .with_breaks([0.01, 0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0]);
    let r = integrate(&is, tol, BUDGET).require("phase shift", tol, 4.0)?;
    Ok(Enclosure::new(r.lo.max(0.0), r.hi.max(0.0)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhaseBounds {
    pub upper: f64,
    pub lower: f64,
    /// `(sup ξ|ψ''|/ψ')·π/4` over the default grid.
    pub global_upper: f64,
    /// `(inf ξ|ψ''|/ψ')·π/4` over the default grid.
    pub global_lower: f64,
}

/// Local bounds on `ϑ_λ` from `ψ, ψ', ψ''` at `λ²`, and the global curvature bounds.
pub fn phase_shift_bounds(spec: &ProcessSpec, lambda: f64) -> PhaseBounds {
    let l2 = lambda * lambda;
    let (p, d1, d2) = spec.eval3(l2);
    let upper = FRAC_PI_2 - (l2 * d1 / p).min(1.0).sqrt().asin();
    let a1sq = p / (l2 * d1);
    let asq = a1sq - 1.0;
    let a2sq = l2 * d2.abs() / (2.0 * d1);
    let lower = if asq > 0.0 && a2sq <= 1.0 {
        let (a, a1, a2) = (asq.sqrt(), a1sq.sqrt(), a2sq.sqrt());
        let b = a1 * a2 / a;
        let c = a2 / a;
        if b <= 1.0 && c <= 1.0 {
            ((a2.asin().powi(2) + b.asin().powi(2) - c.asin().powi(2)) / PI).max(0.0)
        } else {
            0.0
        }
    } else {
        0.0
    };
    let c = check_condition_a1_default(spec);
    let global_lower = if c.inf_estimate.is_finite() { c.inf_estimate * PI / 4.0 } else { 0.0 };
    PhaseBounds { upper, lower, global_upper: c.theta_bound, global_lower }
}

/// `√ψ_λ(λ²)·λψ'(λ²)·Im ψ⁺(−ξ²) / (π|ψ(λ²) − ψ⁺(−ξ²)|²)`, the density without the `1/ψ_λ†(ξ)` factor.
fn gamma_numerator(pl: &PsiLambda<'_>, xi: f64) -> f64 {
    let z = pl.spec().boundary(xi * xi);
    if !(z.im > 0.0) {
        return 0.0;
    }
    let p = pl.psi_at_diagonal();
    let d = (p - z.re).powi(2) + z.im * z.im;
    let c = pl.diagonal().sqrt() * pl.lambda() * pl.dpsi_at_diagonal() / PI;
    c * z.im / d
}

/// Scans `log ξ ∈ [lo, hi]` for real points with `ψ⁺(−ξ²) = ψ(λ²)`.
pub fn resonance_scan(spec: &ProcessSpec, lambda: f64, log_lo: f64, log_hi: f64) -> Result<()> {
    let p = spec.eval(lambda * lambda);
    let g = |u: f64| {
        let s = u.exp();
        spec.boundary(s * s)
    };
    let real_line = |z: num_complex::Complex64| z.im <= 1e-12 * z.norm();
    let n = ((log_hi - log_lo) * 64.0 / std::f64::consts::LN_10).ceil().max(2.0) as usize;
    let mut prev_u = log_lo;
    let mut prev = g(prev_u);
    for i in 1..=n {
        let u = log_lo + (log_hi - log_lo) * i as f64 / n as f64;
        let cur = g(u);
        if real_line(prev) && real_line(cur) && (prev.re - p).signum() != (cur.re - p).signum() {
            let (mut a, mut b) = (prev_u, u);
            let sa = (prev.re - p).signum();
            for _ in 0..80 {
                let m = 0.5 * (a + b);
                if (g(m).re - p).signum() == sa {
                    a = m;
                } else {
                    b = m;
                }
            }
            let z = g(0.5 * (a + b));
            if real_line(z) && (z.re - p).abs() <= 1e-6 * (1.0 + p) {
                return Err(FptError::Resonance { lambda, xi: (0.5 * (a + b)).exp() });
            }
        }
        prev_u = u;
        prev = cur;
    }
    Ok(())
}

/// Density of `γ_λ` at `ξ > 0`; `tol` is the relative tolerance of the inner `ψ_λ†`.
pub fn gamma_density(spec: &ProcessSpec, lambda: f64, xi: f64, tol: f64) -> Result<Enclosure> {
    let l = xi.ln();
    resonance_scan(spec, lambda, l - 0.1, l + 0.1)?;
    let pl = PsiLambda::new(spec, lambda);
    gamma_density_with(&pl, xi, tol)
}

fn gamma_density_with(pl: &PsiLambda<'_>, xi: f64, tol: f64) -> Result<Enclosure> {
    let num = gamma_numerator(pl, xi);
    if num == 0.0 {
        return Ok(Enclosure::exact(0.0));
    }
    let d = psi_lambda_dagger_with(pl, xi, tol)?;
    Ok(Enclosure::point(num).div(d))
}

/// Largest `log ξ` at which the dagger integrand stays finite.
const LOG_XI_CAP: f64 = 280.0;
/// Panel length in `s = log(ξ/λ)`.
const PANEL: f64 = 0.5;
/// `e^{−xΞ}` factor targeted when choosing the upper end of the measure.
const EXP_CUT: f64 = 60.0;
/// Relative Kronrod/Gauss gap above which a panel is bisected.
const REFINE_REL: f64 = 1e-12;
const MAX_REFINE: u32 = 30;

/// Points in `log ξ` where `Im ψ⁺(−ξ²)` switches between zero and positive.
pub fn support_breaks(spec: &ProcessSpec, log_lo: f64, log_hi: f64) -> Vec<f64> {
    let on = |u: f64| {
        let s = u.exp();
        spec.boundary(s * s).im > 0.0
    };
    let n = ((log_hi - log_lo) * 16.0).ceil().max(2.0) as usize;
    let mut out = Vec::new();
    let mut prev_u = log_lo;
    let mut prev = on(prev_u);
    for i in 1..=n {
        let u = log_lo + (log_hi - log_lo) * i as f64 / n as f64;
        let cur = on(u);
        if cur != prev {
            let (mut a, mut b) = (prev_u, u);
            for _ in 0..60 {
                let m = 0.5 * (a + b);
                if on(m) == prev {
                    a = m;
                } else {
                    b = m;
                }
            }
            out.push(0.5 * (a + b));
        }
        prev_u = u;
        prev = cur;
    }
    out
}

/// Panels of length at most [`PANEL`] covering `[lo, hi]`, graded
/// geometrically towards each break.
fn panel_layout(lo: f64, hi: f64, breaks: &[f64]) -> Vec<(f64, f64)> {
    let mut cuts = vec![lo];
    cuts.extend(breaks.iter().copied().filter(|&b| b > lo && b < hi));
    cuts.push(hi);
    let mut out = Vec::new();
    let graded = |out: &mut Vec<(f64, f64)>, from: f64, to: f64, at_start: bool| {
        // to − from ≤ PANEL; split towards the break end
        let len = to - from;
        let mut edges = vec![0.0];
        for k in (1..=30).rev() {
            edges.push(len * 0.5f64.powi(k));
        }
        edges.push(len);
        for w in edges.windows(2) {
            if at_start {
                out.push((from + w[0], from + w[1]));
            } else {
                out.push((to - w[1], to - w[0]));
            }
        }
    };
    let last = cuts.len() - 2;
    for (i, w) in cuts.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let n = ((b - a) / PANEL).ceil().max(1.0) as usize;
        let h = (b - a) / n as f64;
        for j in 0..n {
            let (pa, pb) = (a + h * j as f64, a + h * (j + 1) as f64);
            let near_start = i > 0 && j == 0;
            let near_end = i < last && j == n - 1;
            if near_start && near_end {
                let m = 0.5 * (pa + pb);
                graded(&mut out, pa, m, true);
                graded(&mut out, m, pb, false);
            } else if near_start {
                graded(&mut out, pa, pb, true);
            } else if near_end {
                graded(&mut out, pa, pb, false);
            } else {
                out.push((pa, pb));
            }
        }
    }
    out
}

/// Discrete representation of a measure on `(0, ∞)` with Kronrod/Gauss weights.
#[derive(Clone, Debug)]
pub struct DiscreteMeasure {
    pub nodes: Vec<f64>,
    wk: Vec<f64>,
    wg: Vec<f64>,
    /// Radius of each Kronrod weight from the density enclosure.
    wrad: Vec<f64>,
    /// Bound on the mass below the first node.
    pub mass_below: f64,
    /// Upper end of the represented range.
    pub xi_hi: f64,
    /// Bound on the mass above `xi_hi`.
    pub mass_above: f64,
}

impl DiscreteMeasure {
    fn build(
        log_lo: f64,
        log_hi: f64,
        breaks: &[f64],
        density: &dyn Fn(f64) -> Result<Enclosure>,
    ) -> Result<DiscreteMeasure> {
        let panels = panel_layout(log_lo, log_hi, breaks);
        let mut m = DiscreteMeasure {
            nodes: Vec::with_capacity(21 * panels.len()),
            wk: Vec::with_capacity(21 * panels.len()),
            wg: Vec::with_capacity(21 * panels.len()),
            wrad: Vec::with_capacity(21 * panels.len()),
            mass_below: 0.0,
            xi_hi: log_hi.exp(),
            mass_above: 0.0,
        };
        let mut stack: Vec<(f64, f64, u32)> = panels.into_iter().rev().map(|(a, b)| (a, b, 0)).collect();
        while let Some((a, b, depth)) = stack.pop() {
            let mut nodes = [(0.0, 0.0, 0.0, 0.0); 21];
            let (mut pk, mut pg, mut pr) = (0.0, 0.0, 0.0);
            for (n, (u, wk, wg)) in nodes.iter_mut().zip(kronrod_panel(a, b)) {
                let xi = u.exp();
                let d = density(xi)?;
                *n = (xi, wk * xi * d.mid(), wg * xi * d.mid(), wk * xi * d.rad());
                pk += n.1;
                pg += n.2;
                pr += n.3.abs();
            }
            // a gap below the density noise cannot be refined away
            if (pk - pg).abs() > REFINE_REL * pk.abs() + 4.0 * pr + 1e-17 && depth < MAX_REFINE {
                let m = 0.5 * (a + b);
                stack.push((m, b, depth + 1));
                stack.push((a, m, depth + 1));
                continue;
            }
            for (xi, wk, wg, wr) in nodes {
                m.nodes.push(xi);
                m.wk.push(wk);
                m.wg.push(wg);
                m.wrad.push(wr);
            }
        }
        Ok(m)
    }

    /// Encloses `Σ w_j k(ξ_j)` plus the omitted tails, for a kernel with `0 ≤ k ≤ 1`;
    /// `tail_above` bounds the kernel beyond the range.
    pub fn transform(&self, k: impl Fn(f64) -> f64, tail_below: f64, tail_above: f64) -> Enclosure {
        let mut sum = 0.0;
        let mut err = 0.0;
        let mut rad = 0.0;
        let mut abs = 0.0;
        for (c, chunk) in self.nodes.chunks(21).enumerate() {
            let mut pk = 0.0;
            let mut pg = 0.0;
            for (j, &xi) in chunk.iter().enumerate() {
                let i = 21 * c + j;
                let kv = k(xi);
                pk += self.wk[i] * kv;
                pg += self.wg[i] * kv;
                rad += self.wrad[i] * kv.abs();
                abs += (self.wk[i] * kv).abs();
            }
            sum += pk;
            err += (pk - pg).abs();
        }
        let extra = err + rad + 32.0 * f64::EPSILON * abs;
        Enclosure::around(sum, extra) + Enclosure::new(0.0, self.mass_below * tail_below + self.mass_above * tail_above)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Everything needed to evaluate `F_λ` for one `λ`.
#[derive(Clone, Debug)]
pub struct EigenData {
    spec: ProcessSpec,
    pub lambda: f64,
    pub theta: Enclosure,
    /// `√ψ_λ(λ²)`.
    pub norm: Enclosure,
    pub measure: DiscreteMeasure,
    /// Smallest `x` at which the upper truncation of the measure is negligible.
    pub x_min: f64,
}

impl EigenData {
    /// Builds `ϑ_λ` and the measure `γ_λ`, resolved for `x ≥ x_min`
    /// (`x_min = 0` keeps the widest range, for the total mass).
    pub fn new(spec: &ProcessSpec, lambda: f64, x_min: f64, tol: f64) -> Result<EigenData> {
        let theta = phase_shift(spec, lambda, 0.1 * tol)?;
        let pl = PsiLambda::new(spec, lambda);
        let norm = Enclosure::point(pl.diagonal().sqrt());
        let ll = lambda.ln();
        let cap = LOG_XI_CAP;
        let log_hi = if x_min > 0.0 { (EXP_CUT / x_min).ln().min(cap).max(ll + 2.0) } else { cap };
        let inner = (1e-3 * tol).max(1e-11);
        let density = |xi: f64| gamma_density_with(&pl, xi, inner);
        // walk down until the mass below is negligible
        let mut log_lo = ll - 4.0;
        let mut below;
        loop {
            let xi = log_lo.exp();
            below = 4.0 * xi * density(xi)?.hi;
            if below < 1e-18 || log_lo < -cap {
                break;
            }
            log_lo -= 4.0;
        }
        resonance_scan(spec, lambda, log_lo, log_hi)?;
        let breaks = support_breaks(spec, log_lo, log_hi);
        let mut measure = DiscreteMeasure::build(log_lo, log_hi, &breaks, &density)?;
        measure.mass_below = below;
        // 0 ≤ G_λ ≤ sin ϑ_λ bounds the total mass
        measure.mass_above = if measure.is_empty() { 0.0 } else { theta.sin().hi.max(0.0) };
        if measure.wk.iter().all(|&w| w == 0.0) {
            measure.mass_above = 0.0;
            measure.mass_below = 0.0;
        }
        Ok(EigenData { spec: spec.clone(), lambda, theta, norm, measure, x_min })
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    /// `G_λ(x) = ∫ e^{−xξ} γ_λ(dξ)`.
    pub fn correction(&self, x: f64) -> Enclosure {
        let above = (-x * self.measure.xi_hi).exp();
        let g = self.measure.transform(|xi| (-x * xi).exp(), 1.0, above);
        Enclosure::new(g.lo.max(0.0), g.hi.min(self.theta.sin().hi.max(0.0)).max(g.lo.max(0.0)))
    }

    /// Total mass `∫γ_λ`, with the omitted upper tail estimated by a power law.
    pub fn mass(&self) -> Enclosure {
        self.measure.transform(|_| 1.0, 1.0, 0.0) + Enclosure::new(0.0, self.upper_tail_estimate())
    }

    fn upper_tail_estimate(&self) -> f64 {
        let n = self.measure.len();
        if n < 42 || self.measure.mass_above == 0.0 {
            return 0.0;
        }
        // panel masses of the last two panels give the decay rate in log ξ
        let last: f64 = self.measure.wk[n - 21..].iter().sum();
        let prev: f64 = self.measure.wk[n - 42..n - 21].iter().sum();
        if last <= 0.0 {
            return 0.0;
        }
        let h = (self.measure.nodes[n - 11] / self.measure.nodes[n - 32]).ln();
        let rate = (prev / last).ln() / h;
        if rate > 0.0 {
            2.0 * last / (h * rate)
        } else {
            self.measure.mass_above
        }
    }

    /// `F_λ(x)`; zero for `x ≤ 0` by convention, `sin ϑ_λ − ∫γ_λ` at `x = 0⁺`.
    pub fn eigenfunction(&self, x: f64) -> Enclosure {
        if x < 0.0 {
            return Enclosure::exact(0.0);
        }
        let s = (Enclosure::point(self.lambda * x) + self.theta).sin();
        if x == 0.0 {
            return s - self.mass();
        }
        s - self.correction(x)
    }

    /// `ℒF_λ(ξ)` from the measure: `(λ cos ϑ + ξ sin ϑ)/(λ² + ξ²) − Σ w_j/(ξ + ξ_j)`.
    pub fn laplace(&self, xi: f64) -> Enclosure {
        let l = self.lambda;
        let den = l * l + xi * xi;
        let s = (self.theta.cos() * l + self.theta.sin() * xi).scale(1.0 / den);
        let above = xi / (xi + self.measure.xi_hi);
        let g = self.measure.transform(|e| xi / (xi + e), 1.0, above).scale(1.0 / xi);
        s - g
    }

    /// Density of `γ_λ` at `ξ`.
    pub fn gamma_density(&self, xi: f64, tol: f64) -> Result<Enclosure> {
        gamma_density_with(&PsiLambda::new(&self.spec, self.lambda), xi, tol)
    }
}

/// `F_λ(x)` for one point.
pub fn eigenfunction(spec: &ProcessSpec, lambda: f64, x: f64, tol: f64) -> Result<Enclosure> {
    if x <= 0.0 {
        let d = EigenData::new(spec, lambda, 0.0, tol)?;
        return Ok(d.eigenfunction(x));
    }
    let d = EigenData::new(spec, lambda, 0.5 * x, tol)?;
    Ok(d.eigenfunction(x))
}

/// Encloses `ℒF_λ(ξ) − (λ/(λ² + ξ²))·ψ_λ†(ξ)/√ψ_λ(λ²)`.
pub fn laplace_eigen_check(spec: &ProcessSpec, lambda: f64, xi: f64, tol: f64) -> Result<Enclosure> {
    let d = EigenData::new(spec, lambda, 0.0, tol)?;
    let numeric = d.laplace(xi);
    let pl = PsiLambda::new(spec, lambda);
    let dag = psi_lambda_dagger_with(&pl, xi, 1e-3 * tol)?;
    let closed = dag.div(d.norm).scale(lambda / (lambda * lambda + xi * xi));
    Ok(numeric - closed)
}

/// Closed-form value of the Laplace transform of `F_λ`.
pub fn laplace_eigen_closed_form(spec: &ProcessSpec, lambda: f64, xi: f64, tol: f64) -> Result<Enclosure> {
    let pl = PsiLambda::new(spec, lambda);
    let dag = psi_lambda_dagger_with(&pl, xi, tol)?;
    Ok(dag.scale(lambda / ((lambda * lambda + xi * xi) * pl.diagonal().sqrt())))
}

/// Renewal function of the ladder-height process,
/// `V(x) = V(0) + bx + (1/π)∫ Im(−1/ψ⁺(−ξ²)) (ψ†(ξ)/ξ)(1 − e^{−xξ}) dξ`,
/// where `V(0) = 1/ψ†(∞) = ψ(∞)^{−1/2}` vanishes unless `ψ` is bounded.
#[derive(Clone, Debug)]
pub struct RenewalEval {
    spec: ProcessSpec,
    pub drift: Enclosure,
    /// `V(0)`.
    pub jump: f64,
    measure: DiscreteMeasure,
    /// Point masses `(ξ₀, m)` at real zeros of `ψ⁺(−ξ²)`.
    pub atoms: Vec<(f64, Enclosure)>,
    /// Decay rate of the weight density in `log ξ` at the lower end, and its value there.
    low_rate: f64,
    low_value: f64,
    /// Bound on the mass above the represented range.
    mass_above: f64,
    /// Lower bound on `∫_{ζ ≥ Ξ} ζ/(Ξ + ζ) μ(dζ)` for the top `Ξ` of the range.
    above_kernel: f64,
    top: f64,
}

const RENEWAL_RANGE: f64 = 150.0;

impl RenewalEval {
    pub fn new(spec: &ProcessSpec, tol: f64) -> Result<RenewalEval> {
        let inner = (1e-3 * tol).max(1e-11);
        let weight = |xi: f64| -> Result<Enclosure> {
            let z = spec.boundary(xi * xi);
            if !(z.im > 0.0) {
                return Ok(Enclosure::exact(0.0));
            }
            let im = z.im / z.norm_sqr();
            let d = dagger(spec, xi, inner)?;
            Ok(d.scale(im / (PI * xi)))
        };
        let atoms = if spec.has_atoms() {
            boundary_zeros(spec)?
                .into_iter()
                .map(|(xi, dpsi)| Ok((xi, dagger(spec, xi, inner)?.scale(0.5 / (xi * xi)) * dpsi.recip())))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };
        let breaks = support_breaks(spec, -RENEWAL_RANGE, RENEWAL_RANGE);
        let measure = DiscreteMeasure::build(-RENEWAL_RANGE, RENEWAL_RANGE, &breaks, &weight)?;
        let g = |u: f64| -> Result<f64> { Ok(weight(u.exp())?.mid() * u.exp()) };
        let (lo0, lo1) = (g(-RENEWAL_RANGE)?, g(-RENEWAL_RANGE + 1.0)?);
        let low_rate = if lo0 > 0.0 && lo1 > 0.0 { (lo1 / lo0).ln() } else { f64::INFINITY };
        let drift = spec.drift_coefficient();
        let jump = 1.0 / spec.limit_at_infinity().sqrt();
        // Ξℒ V(Ξ) = 1/ψ†(Ξ) and ζ/(Ξ + ζ) ≥ 1/2 above Ξ bound the missing mass
        let top = measure.xi_hi;
        let seen = measure.transform(|e| e / (top + e), 0.0, 0.0) + atom_sum(&atoms, |e| e / (top + e));
        let rest = dagger(spec, top, inner)?.recip() - Enclosure::point(jump) - drift.scale(1.0 / top) - seen;
        Ok(RenewalEval {
            spec: spec.clone(),
            drift,
            jump,
            measure,
            atoms,
            low_rate,
            low_value: lo0,
            mass_above: 2.0 * rest.hi.max(0.0),
            above_kernel: rest.lo.max(0.0),
            top,
        })
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    /// Omitted tails: a power-law estimate below the range (not certified)
    /// and the certified mass bound above it. `floor` is a lower bound on the
    /// kernel above the range relative to `ζ/(Ξ + ζ)`.
    fn tails(&self, x: f64, floor: f64) -> Enclosure {
        // (1 − e^{−xξ}) ≤ xξ adds one to the decay rate
        let lo = if self.low_value == 0.0 {
            0.0
        } else {
            2.0 * self.low_value * x * (-RENEWAL_RANGE).exp() / (self.low_rate + 1.0).max(1e-3)
        };
        Enclosure::new(floor * self.above_kernel, lo + self.mass_above)
    }

    fn jump_enclosure(&self) -> Enclosure {
        if self.jump == 0.0 {
            Enclosure::exact(0.0)
        } else {
            Enclosure::point(self.jump)
        }
    }

    pub fn value(&self, x: f64) -> Enclosure {
        if x < 0.0 {
            return Enclosure::exact(0.0);
        }
        if x == 0.0 {
            return self.jump_enclosure();
        }
        let v = self.measure.transform(|xi| -(-x * xi).exp_m1(), 0.0, 0.0)
            + atom_sum(&self.atoms, |xi| -(-x * xi).exp_m1());
        // 1 − e^{−xζ} ≥ (1 − e^{−xΞ})·ζ/(Ξ + ζ) above Ξ
        let floor = -(-x * self.top).exp_m1();
        self.jump_enclosure() + self.drift * Enclosure::exact(x) + v + self.tails(x, floor)
    }

    /// `ℒV(ξ) = V(0)/ξ + b/ξ² + Σ w_j (1/ξ − 1/(ξ + ξ_j))`.
    pub fn laplace(&self, xi: f64) -> Enclosure {
        let v = (self.measure.transform(|e| e / (xi + e), 0.0, 0.0) + atom_sum(&self.atoms, |e| e / (xi + e)))
            .scale(1.0 / xi);
        self.jump_enclosure().scale(1.0 / xi)
            + self.drift.scale(1.0 / (xi * xi))
            + v
            + self.tails(1.0 / xi, (self.top / xi).min(1.0)).scale(1.0 / xi)
    }
}

fn atom_sum(atoms: &[(f64, Enclosure)], k: impl Fn(f64) -> f64) -> Enclosure {
    atoms.iter().fold(Enclosure::exact(0.0), |acc, &(xi, m)| acc + m.scale(k(xi)))
}

/// Real zeros `ξ₀` of `ψ⁺(−ξ²)` where the boundary value is real, with an
/// enclosure of `ψ'(−ξ₀²) > 0`. Each carries a renewal atom of mass
/// `ψ†(ξ₀)/(2ξ₀²ψ'(−ξ₀²))`. Sign changes are bisected; a pole shows up as
/// a value at the limit larger than at the bracket ends.
fn boundary_zeros(spec: &ProcessSpec) -> Result<Vec<(f64, Enclosure)>> {
    let real = |u: f64| {
        let s = u.exp();
        let z = spec.boundary(s * s);
        if z.im > 0.0 {
            None
        } else {
            Some(z.re)
        }
    };
    let step = 1.0 / 64.0;
    let mut out = Vec::new();
    let mut u = -RENEWAL_RANGE;
    while u < RENEWAL_RANGE {
        if let (Some(a), Some(b)) = (real(u), real(u + step)) {
            if a * b < 0.0 {
                let (mut lo, mut hi) = (u, u + step);
                for _ in 0..80 {
                    let m = 0.5 * (lo + hi);
                    match real(m) {
                        Some(v) if v * a > 0.0 => lo = m,
                        Some(_) => hi = m,
                        None => break,
                    }
                }
                let um = 0.5 * (lo + hi);
                if real(um).is_some_and(|v| v.abs() < a.abs().min(b.abs())) {
                    let xi = um.exp();
                    out.push((xi, boundary_slope(spec, xi * xi, (step.exp() - 1.0) * xi * xi)?));
                }
            }
        }
        u += step;
    }
    Ok(out)
}

/// `ψ'(−s) = −(d/ds) Re ψ⁺(−s)` by Richardson-extrapolated central
/// differences, with the last two extrapolants as the error estimate.
fn boundary_slope(spec: &ProcessSpec, s: f64, reach: f64) -> Result<Enclosure> {
    let d = |h: f64| (spec.boundary(s - h).re - spec.boundary(s + h).re) / (2.0 * h);
    let mut h = 1e-2 * reach;
    for _ in 0..6 {
        let (d1, d2, d4) = (d(h), d(0.5 * h), d(0.25 * h));
        let r1 = (4.0 * d2 - d1) / 3.0;
        let r2 = (4.0 * d4 - d2) / 3.0;
        let r = (16.0 * r2 - r1) / 15.0;
        let rad = (r - r2).abs() + 1e3 * f64::EPSILON * r.abs();
        if r > 0.0 && rad < 1e-9 * r {
            return Ok(Enclosure::around(r, rad));
        }
        h *= 0.1;
    }
    Err(FptError::Unsupported(format!("renewal atom weight unresolved at -{s:e} ({spec})")))
}

/// `V(x)`; prefer [`RenewalEval`] for many points.
pub fn renewal(spec: &ProcessSpec, x: f64, tol: f64) -> Result<Enclosure> {
    Ok(RenewalEval::new(spec, tol)?.value(x))
}

/// Lagrange interpolation on equispaced nodes `t = 0, 1, …, n−1` at `t`.
fn lagrange(vals: &[f64], t: f64) -> f64 {
    let n = vals.len();
    let mut s = 0.0;
    for i in 0..n {
        let mut w = 1.0;
        for j in 0..n {
            if j != i {
                w *= (t - j as f64) / (i as f64 - j as f64);
            }
        }
        s += w * vals[i];
    }
    s
}

/// Interpolates on six nodes around `t` and estimates the error by the
/// difference to the inner four-node interpolant.
fn interp6(get: &mut dyn FnMut(i64) -> Result<Enclosure>, t: f64) -> Result<Enclosure> {
    let k = t.floor() as i64;
    let mut mids = [0.0; 6];
    let mut rad: f64 = 0.0;
    for (j, m) in mids.iter_mut().enumerate() {
        let e = get(k - 2 + j as i64)?;
        *m = e.mid();
        rad = rad.max(e.rad());
    }
    let u = t - (k - 2) as f64;
    let v6 = lagrange(&mids, u);
    let v4 = lagrange(&mids[1..5], u - 1.0);
    Ok(Enclosure::around(v6, 2.0 * rad + (v6 - v4).abs()))
}

/// Samples per unit of `log y` in the homogeneous correction table.
const TABLE_DENSITY: f64 = 32.0;
/// Nodes per decade of `λ` for specs without scaling symmetry.
pub const LAMBDA_NODES_PER_DECADE: f64 = 32.0;

/// Tabulated `G₁(y) = G_1(y)` on a log grid, for specs with `F_λ(x) = F_1(λx)`.
#[derive(Debug)]
struct CorrectionTable {
    log_lo: f64,
    vals: Vec<Enclosure>,
}

/// Fast evaluation of `F_λ(x)` over ranges of `λ` and `x`.
///
/// Specs with a scaling symmetry use `F_λ(x) = F_1(λx)` with a tabulated
/// `G_1`; others interpolate `ϑ_λ` and `G_λ(x)` over a grid in `log λ`,
/// memoising the grid values per `x`.
#[derive(Debug)]
pub struct EigenTable {
    spec: ProcessSpec,
    tol: f64,
    mode: Mode,
}

#[derive(Debug)]
enum Mode {
    Scaling { data: Box<EigenData>, table: CorrectionTable },
    Grid { x_min: f64, nodes: Mutex<HashMap<i64, Arc<OnceLock<std::result::Result<Arc<EigenData>, FptError>>>>>, memo: Mutex<HashMap<(i64, u64), Enclosure>> },
}

/// Smallest `λx` resolved by the scaling table.
pub const Y_MIN: f64 = 1e-60;

impl EigenTable {
    /// `x_min` is the smallest barrier level that will be queried.
    pub fn new(spec: &ProcessSpec, x_min: f64, tol: f64) -> Result<EigenTable> {
        let mode = if spec.meta().homogeneity.is_some() {
            let data = EigenData::new(spec, 1.0, Y_MIN, tol)?;
            let log_lo = Y_MIN.ln();
            let mut vals = Vec::new();
            let mut i = 0;
            loop {
                let y = (log_lo + i as f64 / TABLE_DENSITY).exp();
                let g = data.correction(y);
                vals.push(g);
                i += 1;
                if (g.hi < 1e-18 && vals.len() > 8) || y > 1e18 {
                    // a few extra nodes for the interpolation stencil
                    for _ in 0..4 {
                        let y = (log_lo + i as f64 / TABLE_DENSITY).exp();
                        vals.push(data.correction(y));
                        i += 1;
                    }
                    break;
                }
            }
            Mode::Scaling { data: Box::new(data), table: CorrectionTable { log_lo, vals } }
        } else {
            Mode::Grid { x_min, nodes: Mutex::new(HashMap::new()), memo: Mutex::new(HashMap::new()) }
        };
        Ok(EigenTable { spec: spec.clone(), tol, mode })
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    fn node(&self, k: i64) -> Result<Arc<EigenData>> {
        let Mode::Grid { x_min, nodes, .. } = &self.mode else { unreachable!() };
        let cell = nodes.lock().expect("poisoned").entry(k).or_default().clone();
        let lambda = 10f64.powf(k as f64 / LAMBDA_NODES_PER_DECADE);
        cell.get_or_init(|| EigenData::new(&self.spec, lambda, *x_min, self.tol).map(Arc::new)).clone()
    }

    /// `ϑ_λ`.
    pub fn theta(&self, lambda: f64) -> Result<Enclosure> {
        match &self.mode {
            Mode::Scaling { data, .. } => Ok(data.theta),
            Mode::Grid { .. } => {
                let t = lambda.log10() * LAMBDA_NODES_PER_DECADE;
                interp6(&mut |k| Ok(self.node(k)?.theta), t)
            }
        }
    }

    fn table_correction(data: &EigenData, table: &CorrectionTable, y: f64) -> Enclosure {
        let t = (y.ln() - table.log_lo) * TABLE_DENSITY;
        let k = t.floor() as i64;
        if k < 2 || k + 4 >= table.vals.len() as i64 {
            return data.correction(y);
        }
        let mut get = |i: i64| Ok(table.vals[i as usize]);
        let g = interp6(&mut get, t).expect("table lookup");
        Enclosure::new(g.lo.max(0.0), g.hi)
    }

    /// `G_λ(x)`.
    pub fn correction(&self, lambda: f64, x: f64) -> Result<Enclosure> {
        match &self.mode {
            Mode::Scaling { data, table } => Ok(Self::table_correction(data, table, lambda * x)),
            Mode::Grid { memo, .. } => {
                let t = lambda.log10() * LAMBDA_NODES_PER_DECADE;
                let mut get = |k: i64| -> Result<Enclosure> {
                    let key = (k, x.to_bits());
                    if let Some(v) = memo.lock().expect("poisoned").get(&key) {
                        return Ok(*v);
                    }
                    let v = self.node(k)?.correction(x);
                    memo.lock().expect("poisoned").insert(key, v);
                    Ok(v)
                };
                interp6(&mut get, t)
            }
        }
    }

    /// `F_λ(x)`.
    pub fn eigenfunction(&self, lambda: f64, x: f64) -> Result<Enclosure> {
        if x <= 0.0 {
            return Ok(Enclosure::exact(0.0));
        }
        let theta = self.theta(lambda)?;
        let s = (Enclosure::point(lambda * x) + theta).sin();
        Ok(s - self.correction(lambda, x)?)
    }

    /// Upper bound on `sup_λ ϑ_λ`: exact for scaling specs, otherwise the curvature bound.
    pub fn theta_sup(&self) -> f64 {
        match &self.mode {
            Mode::Scaling { data, .. } => data.theta.hi,
            Mode::Grid { .. } => check_condition_a1_default(&self.spec).theta_bound,
        }
    }
}
