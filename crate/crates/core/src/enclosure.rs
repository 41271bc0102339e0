//! Closed intervals with outward-rounded arithmetic.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

/// A closed interval `[lo, hi]` that contains some real quantity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Enclosure {
    pub lo: f64,
    pub hi: f64,
}

fn down(x: f64) -> f64 {
    if x.is_finite() {
        x.next_down()
    } else {
        x
    }
}

fn up(x: f64) -> f64 {
    if x.is_finite() {
        x.next_up()
    } else {
        x
    }
}

impl Enclosure {
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(!(lo > hi), "inverted enclosure [{lo}, {hi}]");
        Enclosure { lo, hi }
    }

    /// Degenerate interval at an exactly representable value.
    pub fn exact(x: f64) -> Self {
        Enclosure { lo: x, hi: x }
    }

    /// A computed value together with one ulp of slack on each side.
    pub fn point(x: f64) -> Self {
        Enclosure { lo: down(x), hi: up(x) }
    }

    /// `mid ± rad`, widened outward.
    pub fn around(mid: f64, rad: f64) -> Self {
        let rad = rad.abs();
        Enclosure { lo: down(mid - rad), hi: up(mid + rad) }
    }

    /// Smallest interval containing both endpoints, in either order.
    pub fn hull_of(a: f64, b: f64) -> Self {
        Enclosure { lo: a.min(b), hi: a.max(b) }
    }

    pub fn hull(self, other: Enclosure) -> Self {
        Enclosure { lo: self.lo.min(other.lo), hi: self.hi.max(other.hi) }
    }

    pub fn mid(self) -> f64 {
        0.5 * self.lo + 0.5 * self.hi
    }

    pub fn rad(self) -> f64 {
        0.5 * (self.hi - self.lo)
    }

    pub fn width(self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn intersects(self, other: Enclosure) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    pub fn is_finite(self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Widens by `r` on both sides.
    pub fn inflate(self, r: f64) -> Self {
        Enclosure { lo: down(self.lo - r.abs()), hi: up(self.hi + r.abs()) }
    }

    pub fn scale(self, c: f64) -> Self {
        if c >= 0.0 {
            Enclosure { lo: down(self.lo * c), hi: up(self.hi * c) }
        } else {
            Enclosure { lo: down(self.hi * c), hi: up(self.lo * c) }
        }
    }

    /// Largest absolute value attained on the interval.
    pub fn mag(self) -> f64 {
        self.lo.abs().max(self.hi.abs())
    }

    pub fn abs(self) -> Self {
        if self.lo >= 0.0 {
            self
        } else if self.hi <= 0.0 {
            -self
        } else {
            Enclosure { lo: 0.0, hi: self.mag() }
        }
    }

    pub fn sqr(self) -> Self {
        let a = self.abs();
        Enclosure { lo: down(a.lo * a.lo).max(0.0), hi: up(a.hi * a.hi) }
    }

    pub fn recip(self) -> Self {
        if self.lo > 0.0 || self.hi < 0.0 {
            Enclosure { lo: down(1.0 / self.hi), hi: up(1.0 / self.lo) }
        } else {
            Enclosure { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
        }
    }

    pub fn div(self, other: Enclosure) -> Self {
        self * other.recip()
    }

    pub fn sqrt(self) -> Self {
        Enclosure { lo: down(self.lo.max(0.0).sqrt()).max(0.0), hi: up(self.hi.max(0.0).sqrt()) }
    }

    pub fn exp(self) -> Self {
        Enclosure { lo: down(down(self.lo.exp())).max(0.0), hi: up(up(self.hi.exp())) }
    }

    pub fn ln(self) -> Self {
        Enclosure { lo: down(down(self.lo.ln())), hi: up(up(self.hi.ln())) }
    }

    /// `x^p` for a nonnegative interval and real exponent.
    pub fn powf(self, p: f64) -> Self {
        let a = down(down(self.lo.max(0.0).powf(p)));
        let b = up(up(self.hi.max(0.0).powf(p)));
        Enclosure::hull_of(a, b).clamp_lo(0.0)
    }

    fn clamp_lo(self, m: f64) -> Self {
        Enclosure { lo: self.lo.max(m), hi: self.hi.max(m) }
    }

    pub fn sin(self) -> Self {
        periodic_range(self, f64::sin, std::f64::consts::FRAC_PI_2)
    }

    pub fn cos(self) -> Self {
        periodic_range(self, f64::cos, 0.0)
    }

    /// `arctan` is monotone, so endpoints suffice.
    pub fn atan(self) -> Self {
        Enclosure { lo: down(down(self.lo.atan())), hi: up(up(self.hi.atan())) }
    }
}

/// Range of sin or cos over an interval: endpoints plus any interior extremum.
/// `peak` is the phase of the first maximum (π/2 for sin, 0 for cos).
fn periodic_range(x: Enclosure, f: fn(f64) -> f64, peak: f64) -> Enclosure {
    use std::f64::consts::PI;
    if x.width() >= 2.0 * PI || !x.is_finite() {
        return Enclosure { lo: -1.0, hi: 1.0 };
    }
    let a = f(x.lo);
    let b = f(x.hi);
    let mut lo = a.min(b);
    let mut hi = a.max(b);
    // maxima at peak + 2kπ, minima at peak + π + 2kπ
    let k_max = ((x.lo - peak) / (2.0 * PI)).ceil();
    if peak + 2.0 * PI * k_max <= x.hi {
        hi = 1.0;
    }
    let k_min = ((x.lo - peak - PI) / (2.0 * PI)).ceil();
    if peak + PI + 2.0 * PI * k_min <= x.hi {
        lo = -1.0;
    }
    Enclosure { lo: down(down(lo)).max(-1.0), hi: up(up(hi)).min(1.0) }
}

impl Add for Enclosure {
    type Output = Enclosure;
    fn add(self, o: Enclosure) -> Enclosure {
        Enclosure { lo: down(self.lo + o.lo), hi: up(self.hi + o.hi) }
    }
}

impl Add<f64> for Enclosure {
    type Output = Enclosure;
    fn add(self, o: f64) -> Enclosure {
        self + Enclosure::exact(o)
    }
}

impl Sub for Enclosure {
    type Output = Enclosure;
    fn sub(self, o: Enclosure) -> Enclosure {
        Enclosure { lo: down(self.lo - o.hi), hi: up(self.hi - o.lo) }
    }
}

impl Sub<f64> for Enclosure {
    type Output = Enclosure;
    fn sub(self, o: f64) -> Enclosure {
        self - Enclosure::exact(o)
    }
}

impl Neg for Enclosure {
    type Output = Enclosure;
    fn neg(self) -> Enclosure {
        Enclosure { lo: -self.hi, hi: -self.lo }
    }
}

impl Mul for Enclosure {
    type Output = Enclosure;
    fn mul(self, o: Enclosure) -> Enclosure {
        let p = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in p {
            // 0 * inf contributes 0
            let v = if v.is_nan() { 0.0 } else { v };
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Enclosure { lo: down(lo), hi: up(hi) }
    }
}

impl Mul<f64> for Enclosure {
    type Output = Enclosure;
    fn mul(self, c: f64) -> Enclosure {
        self.scale(c)
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:.12e}, {:.12e}]", self.lo, self.hi)
    }
}
