//! Independent checks: Monte Carlo simulation of `X_t = B_{Z_t}`, the
//! spectral identity that integrates to `π/2`, and the Laplace transform of
//! the survival function in `x`.

use std::cell::RefCell;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma, StandardNormal};
use rayon::prelude::*;

use crate::cbf::{Family, ProcessSpec};
use crate::dagger::{psi_lambda_dagger_with, sandwich_factor, PsiLambda};
use crate::enclosure::Enclosure;
use crate::error::{FptError, Result};
use crate::passage::{tail_bound, Survival};
use crate::quadrature::{integrate, Domain, IntegrandSpec};
use crate::special::{erf, erfc};

/// Subordinator `Z_t` driving `X_t = B_{Z_t}` with `var B_s = 2s`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Subordinator {
    /// `Z_t = t`.
    Identity,
    /// Positive stable with `E e^{−sZ_t} = e^{−t s^β}`, `0 < β < 1`.
    Stable { beta: f64 },
    /// Gamma process with `E e^{−sZ_t} = (1 + s)^{−t}`.
    Gamma,
    /// Rate-one compound Poisson with `Exp(1)` jumps.
    CompoundExp,
}

impl Subordinator {
    /// The subordinator whose Laplace exponent is `ψ`.
    pub fn for_spec(spec: &ProcessSpec) -> Result<Subordinator> {
        match spec.family() {
            Family::Stable { alpha } if *alpha == 2.0 => Ok(Subordinator::Identity),
            Family::Stable { alpha } => Ok(Subordinator::Stable { beta: alpha / 2.0 }),
            Family::Log1p => Ok(Subordinator::Gamma),
            Family::CompoundPoissonLaplace => Ok(Subordinator::CompoundExp),
            _ => Err(FptError::Unsupported(format!("no exact subordinator sampler for {spec}"))),
        }
    }

    fn increment(self, dt: f64, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Subordinator::Identity => dt,
            Subordinator::Stable { beta } => dt.powf(1.0 / beta) * positive_stable(beta, rng),
            Subordinator::Gamma => Gamma::new(dt, 1.0).expect("positive shape").sample(rng),
            Subordinator::CompoundExp => {
                let mut z = 0.0;
                let mut clock: f64 = Exp1.sample(rng);
                while clock < dt {
                    z += Distribution::<f64>::sample(&Exp1, rng);
                    clock += Distribution::<f64>::sample(&Exp1, rng);
                }
                z
            }
        }
    }
}

/// Kanter's representation of the positive stable law with `E e^{−sS} = e^{−s^β}`.
fn positive_stable(beta: f64, rng: &mut ChaCha8Rng) -> f64 {
    let u: f64 = rng.gen_range(f64::EPSILON..PI);
    let e: f64 = Exp1.sample(rng);
    let a = (beta * u).sin() / u.sin().powf(1.0 / beta);
    let b = (((1.0 - beta) * u).sin() / e).powf((1.0 - beta) / beta);
    a * b
}

#[derive(Clone, Debug, PartialEq)]
pub struct McConfig {
    pub paths: u64,
    /// Time step of the discrete path.
    pub step: f64,
    /// Largest simulated time.
    pub horizon: f64,
    pub seed: u64,
    /// Barrier level `x`.
    pub barrier: f64,
    pub sampler: Subordinator,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McEstimate {
    pub t: f64,
    /// Fraction of paths whose discrete maximum up to `t` stays below the barrier.
    pub p_hat: f64,
    /// `√(p̂(1−p̂)/paths)`.
    pub std_err: f64,
    pub paths: u64,
}

/// Discrete monitoring misses excursions between steps, so `p_hat` overestimates `P(τ_x > t)`.
pub const BIAS_NOTE: &str = "discrete monitoring overestimates the survival probability";

/// Monte Carlo estimate of `P(τ_x > t)` at each `t` of `times`.
///
/// Path `i` draws from a ChaCha8 stream keyed by `(seed, i)`, so the result
/// does not depend on scheduling.
pub fn mc_survival(config: &McConfig, times: &[f64]) -> Result<Vec<McEstimate>> {
    if config.paths == 0 || !(config.step > 0.0) || !(config.horizon > 0.0) {
        return Err(FptError::InvalidInput("paths, step and horizon must be positive".into()));
    }
    if times.iter().any(|&t| !(t >= 0.0 && t <= config.horizon)) {
        return Err(FptError::InvalidInput(format!("times must lie in [0, {}]", config.horizon)));
    }
    let steps = (config.horizon / config.step).ceil() as usize;
    // index of the last step at or before each requested time
    let marks: Vec<usize> = times.iter().map(|&t| ((t / config.step) + 1e-9).floor() as usize).collect();
    let survive = (0..config.paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(i);
            let mut x = 0.0f64;
            // first step at which the barrier is reached
            let mut hit = usize::MAX;
            for k in 1..=steps {
                let z = config.sampler.increment(config.step, &mut rng);
                let n: f64 = StandardNormal.sample(&mut rng);
                x += (2.0 * z).sqrt() * n;
                if x >= config.barrier {
                    hit = k;
                    break;
                }
            }
            marks.iter().map(|&m| u64::from(hit > m)).collect::<Vec<u64>>()
        })
        .reduce(
            || vec![0; times.len()],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                a
            },
        );
    Ok(times
        .iter()
        .zip(survive)
        .map(|(&t, s)| {
            let p = s as f64 / config.paths as f64;
            McEstimate { t, p_hat: p, std_err: (p * (1.0 - p) / config.paths as f64).sqrt(), paths: config.paths }
        })
        .collect())
}

/// `P(τ_x > t) = erf(x/(2√t))` for `ψ(ξ) = ξ`.
pub fn brownian_survival(x: f64, t: f64) -> f64 {
    erf(x / (2.0 * t.sqrt()))
}

/// `−d/dt P(τ_x > t)` for `ψ(ξ) = ξ`.
pub fn brownian_density(x: f64, t: f64) -> f64 {
    x / (2.0 * (PI * t).sqrt() * t) * (-x * x / (4.0 * t)).exp()
}

/// `∫₀^∞ e^{−ξx} erf(x/(2√t)) dx = e^{ξ²t} erfc(ξ√t)/ξ`.
pub fn brownian_survival_laplace(xi: f64, t: f64) -> f64 {
    (xi * xi * t).exp() * erfc(xi * t.sqrt()) / xi
}

/// Encloses
/// `∫₀^∞ λ⁴ψ'(λ²)(ξ₁+ξ₂)ψ_λ†(ξ₁)ψ_λ†(ξ₂) / (ψ(λ²)(λ²+ξ₁²)(λ²+ξ₂²)) dλ`, which equals `π/2`.
///
/// The integrand is at most `S(ξ₁+ξ₂)λ² m₁m₂/((λ²+ξ₁²)(λ²+ξ₂²))` with
/// `S = e^{4𝒞/π}` and `m_i = max(1, ξ_i/λ)`, which bounds both end pieces.
pub fn piovertwo_check(spec: &ProcessSpec, xi1: f64, xi2: f64, tol: f64) -> Result<Enclosure> {
    if !(xi1 > 0.0 && xi2 > 0.0 && tol > 0.0) {
        return Err(FptError::InvalidInput("xi1, xi2 and tol must be positive".into()));
    }
    let s = sandwich_factor().powi(2);
    let (lo_xi, hi_xi) = (xi1.min(xi2), xi1.max(xi2));
    let eps = (0.1 * tol * lo_xi * hi_xi / (s * (xi1 + xi2))).min(lo_xi);
    let big = (s * (xi1 + xi2) / (0.1 * tol)).max(hi_xi);
    let err = RefCell::new(None);
    let inner = (1e-3 * tol).clamp(1e-11, 1e-6);
    let f = |u: f64| -> Enclosure {
        if err.borrow().is_some() {
            return Enclosure::point(0.0);
        }
        let l = u.exp();
        let l2 = l * l;
        let pl = PsiLambda::new(spec, l);
        let d = psi_lambda_dagger_with(&pl, xi1, inner).and_then(|a| Ok(a * psi_lambda_dagger_with(&pl, xi2, inner)?));
        match d {
            Ok(d) => {
                let c = l2 * l2 * pl.dpsi_at_diagonal() * (xi1 + xi2)
                    / (pl.psi_at_diagonal() * (l2 + xi1 * xi1) * (l2 + xi2 * xi2));
                d.scale(c * l)
            }
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                Enclosure::new(f64::NEG_INFINITY, f64::INFINITY)
            }
        }
    };
    let is = IntegrandSpec::new(f, Domain::Finite(eps.ln(), big.ln())).with_max_panel(1.0);
    let r = integrate(&is, 0.7 * tol, 20_000);
    if let Some(e) = err.borrow_mut().take() {
        return Err(e);
    }
    let ends = s * (xi1 + xi2) * (eps / (xi1 * xi2) + 1.0 / big);
    Ok(r.value + Enclosure::new(0.0, ends))
}

/// Encloses `∫₀^∞ e^{−ξx} P(τ_x > t) dx − (2/π)∫₀^∞ (λ/(λ²+ξ²))(λψ'(λ²)/ψ(λ²))ψ_λ†(ξ)e^{−tψ(λ²)} dλ`.
///
/// The left side integrates survival values over `x ∈ [x_lo, x_max]`; the
/// pieces outside contribute at most `x_lo` and `e^{−ξ x_max}/ξ`.
pub fn laplace_consistency(spec: &ProcessSpec, t: f64, xi: f64, x_max: f64, tol: f64) -> Result<Enclosure> {
    let left = laplace_left(spec, t, xi, x_max, tol)?;
    let right = laplace_right(spec, t, xi, tol)?;
    Ok(left - right)
}

/// `∫₀^∞ e^{−ξx} P(τ_x > t) dx` from survival values.
pub fn laplace_left(spec: &ProcessSpec, t: f64, xi: f64, x_max: f64, tol: f64) -> Result<Enclosure> {
    let x_lo = 0.1 * tol;
    let engine = Survival::new(spec, x_lo)?;
    engine.check_time(t, 0, None)?;
    let err = RefCell::new(None);
    let inner = 0.05 * tol;
    let f = |u: f64| -> Enclosure {
        if err.borrow().is_some() {
            return Enclosure::point(0.0);
        }
        let x = u.exp();
        match engine.eval(x, t, 0, inner, None) {
            Ok(r) => r.value.scale((-xi * x).exp() * x),
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                Enclosure::new(f64::NEG_INFINITY, f64::INFINITY)
            }
        }
    };
    let is = IntegrandSpec::new(f, Domain::Finite(x_lo.ln(), x_max.ln())).with_max_panel(1.0);
    let r = integrate(&is, 0.5 * tol, 4_000);
    if let Some(e) = err.borrow_mut().take() {
        return Err(e);
    }
    Ok(r.value + Enclosure::new(0.0, x_lo + (-xi * x_max).exp() / xi))
}

/// `(2/π)∫₀^∞ (λ/(λ²+ξ²))(λψ'(λ²)/ψ(λ²))ψ_λ†(ξ)e^{−tψ(λ²)} dλ`.
///
/// For `λ ≤ ε < ξ` the integrand is at most
/// `(2/π)(e^{2𝒞/π}/ξ)(ψ(ξ²) − ψ(ε²))^{−1/2} d/dλ √ψ(λ²)`, so the piece below `ε`
/// is at most `(2/π)(e^{2𝒞/π}/ξ)√(ψ(ε²)/(ψ(ξ²) − ψ(ε²)))`. Beyond `Λ` the
/// remainder is at most `e^{2𝒞/π} I₀(t, Λ)/2`.
pub fn laplace_right(spec: &ProcessSpec, t: f64, xi: f64, tol: f64) -> Result<Enclosure> {
    let s = sandwich_factor();
    let head_bound = |eps: f64| {
        let pe = spec.eval(eps * eps);
        2.0 / PI * s / xi * (pe / (spec.eval(xi * xi) - pe)).sqrt()
    };
    let mut eps = 0.5 * xi;
    let mut head = head_bound(eps);
    while head > 0.05 * tol {
        eps *= 0.25;
        if eps < 1e-150 {
            return Err(FptError::Quadrature {
                what: "laplace transform near zero",
                achieved: head,
                tol: 0.05 * tol,
            });
        }
        head = head_bound(eps);
    }
    let mut big = xi.max(1.0);
    let mut tail = f64::INFINITY;
    for _ in 0..200 {
        tail = 0.5 * s * tail_bound(spec, 0, t, big, 1e-3 * tol)?.value.hi;
        if tail <= 0.05 * tol {
            break;
        }
        big *= 2.0;
    }
    let err = RefCell::new(None);
    let inner = (1e-3 * tol).clamp(1e-11, 1e-6);
    let f = |u: f64| -> Enclosure {
        if err.borrow().is_some() {
            return Enclosure::point(0.0);
        }
        let l = u.exp();
        let l2 = l * l;
        let pl = PsiLambda::new(spec, l);
        match psi_lambda_dagger_with(&pl, xi, inner) {
            Ok(d) => {
                let p = pl.psi_at_diagonal();
                let c = 2.0 / PI * l / (l2 + xi * xi) * l * pl.dpsi_at_diagonal() / p * (-t * p).exp();
                d.scale(c * l)
            }
            Err(e) => {
                err.borrow_mut().get_or_insert(e);
                Enclosure::new(f64::NEG_INFINITY, f64::INFINITY)
            }
        }
    };
    let is = IntegrandSpec::new(f, Domain::Finite(eps.ln(), big.ln())).with_max_panel(1.0);
    let r = integrate(&is, 0.4 * tol, 20_000);
    if let Some(e) = err.borrow_mut().take() {
        return Err(e);
    }
    Ok(r.value + Enclosure::new(0.0, head + tail))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cbf::{brownian, make_stable};

    #[test]
    fn piovertwo_stable() {
        let e = piovertwo_check(&make_stable(1.0).unwrap(), 1.0, 1.0, 1e-6).unwrap();
        assert!(e.contains(PI / 2.0), "{e}");
    }

    #[test]
    fn kanter_sampler_has_unit_laplace_exponent() {
        // E e^{−S} = e^{−1} for every β
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 200_000;
        let m: f64 = (0..n).map(|_| (-positive_stable(0.5, &mut rng)).exp()).sum::<f64>() / n as f64;
        assert!((m - (-1f64).exp()).abs() < 4e-3, "{m}");
    }

    #[test]
    fn reproducible() {
        let c = McConfig { paths: 500, step: 1e-2, horizon: 1.0, seed: 3, barrier: 1.0, sampler: Subordinator::Identity };
        assert_eq!(mc_survival(&c, &[0.5, 1.0]).unwrap(), mc_survival(&c, &[0.5, 1.0]).unwrap());
    }

    #[test]
    fn brownian_laplace_closed_form() {
        let r = laplace_right(&brownian(), 1.0, 0.5, 1e-6).unwrap();
        assert!(r.contains(brownian_survival_laplace(0.5, 1.0)), "{r}");
    }
}
