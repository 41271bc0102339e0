//! Invariant checks run by the `validate` command.

use std::f64::consts::FRAC_PI_2;
use std::fmt::Write;

use fpt_core::cbf::{check_condition_a1_default, log_grid, ProcessSpec};
use fpt_core::dagger::{dagger, sandwich_factor};
use fpt_core::oracle::piovertwo_check;
use fpt_core::spectral::{phase_shift, phase_shift_bounds, EigenData, RenewalEval};
use fpt_core::{Enclosure, FptError};

use crate::run::{num, Table};

pub const CONDITION_CHECK: &str = "condition-a1";

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub argument: String,
    pub value: Enclosure,
    pub expected: String,
    pub pass: bool,
    /// Error text when the computation itself failed.
    pub note: String,
}

impl Check {
    fn new(name: &'static str, argument: String, value: Enclosure, expected: impl Into<String>, pass: bool) -> Check {
        Check { name, argument, value, expected: expected.into(), pass, note: String::new() }
    }

    fn failed(name: &'static str, argument: String, expected: impl Into<String>, err: FptError) -> Check {
        Check {
            name,
            argument,
            value: Enclosure::new(f64::NAN, f64::NAN),
            expected: expected.into(),
            pass: false,
            note: err.to_string(),
        }
    }
}

fn shape_checks(spec: &ProcessSpec, out: &mut Vec<Check>) {
    let grid = log_grid(1e-6, 1e6, 64);
    let (mut min_d1, mut max_d2, mut max_ratio, mut max_curv) =
        (f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &x in &grid {
        let (p, d1, d2) = spec.eval3(x);
        min_d1 = min_d1.min(d1);
        max_d2 = max_d2.max(d2);
        max_ratio = max_ratio.max(x * d1 / p);
        max_curv = max_curv.max(-x * d2 / d1);
    }
    let arg = "xi in [1e-6, 1e6], 64 log points".to_string();
    out.push(Check::new("psi-increasing", arg.clone(), Enclosure::point(min_d1), "min psi' > 0", min_d1 > 0.0));
    out.push(Check::new("psi-concave", arg.clone(), Enclosure::point(max_d2), "max psi'' <= 0", max_d2 <= 0.0));
    out.push(Check::new(
        "psi-ratio",
        arg.clone(),
        Enclosure::point(max_ratio),
        "max xi psi'/psi <= 1",
        max_ratio <= 1.0 + 1e-12,
    ));
    out.push(Check::new(
        "psi-curvature",
        arg,
        Enclosure::point(max_curv),
        "max -xi psi''/psi' <= 2",
        max_curv <= 2.0 + 1e-12,
    ));
}

/// Runs every check; failures are recorded, never propagated.
pub fn run_suite(spec: &ProcessSpec, tol: f64) -> Vec<Check> {
    let mut out = Vec::new();
    shape_checks(spec, &mut out);

    let a1 = check_condition_a1_default(spec);
    out.push(Check::new(
        CONDITION_CHECK,
        "sup of xi|psi''|/psi'".into(),
        Enclosure::point(a1.sup_estimate),
        "< 2",
        a1.passes,
    ));

    let s = sandwich_factor();
    for xi in log_grid(1e-3, 1e3, 7) {
        let arg = format!("xi={xi}");
        let expected = format!("within [{}, {}]", num(1.0 / s), num(s));
        match dagger(spec, xi, tol) {
            Ok(d) => {
                let r = d.scale(1.0 / spec.eval(xi * xi).sqrt());
                out.push(Check::new("dagger-sandwich", arg, r, expected, r.lo >= 1.0 / s && r.hi <= s));
            }
            Err(e) => out.push(Check::failed("dagger-sandwich", arg, expected, e)),
        }
    }

    for (a, b) in [(1.0, 1.0), (2.0, 3.0), (0.5, 5.0)] {
        let arg = format!("xi1={a} xi2={b}");
        match piovertwo_check(spec, a, b, tol) {
            Ok(e) => out.push(Check::new("piovertwo", arg, e, "encloses pi/2", e.contains(FRAC_PI_2))),
            Err(e) => out.push(Check::failed("piovertwo", arg, "encloses pi/2", e)),
        }
    }

    for l in [0.1, 1.0, 10.0] {
        let arg = format!("lambda={l}");
        let b = phase_shift_bounds(spec, l);
        let (lo, hi) = (b.lower.max(b.global_lower), b.upper.min(b.global_upper));
        let expected = format!("meets [{}, {}]", num(lo), num(hi));
        match phase_shift(spec, l, tol) {
            Ok(e) => out.push(Check::new("phase-shift-bounds", arg, e, expected, e.lo <= hi && e.hi >= lo)),
            Err(e) => out.push(Check::failed("phase-shift-bounds", arg, expected, e)),
        }
    }

    match RenewalEval::new(spec, tol) {
        Ok(r) => {
            for x in [0.01, 1.0, 100.0] {
                let v = r.value(x).scale(spec.eval(1.0 / (x * x)).sqrt());
                out.push(Check::new(
                    "renewal-factor-5",
                    format!("x={x}"),
                    v,
                    "V(x) sqrt(psi(1/x^2)) meets [0.2, 5]",
                    v.lo <= 5.0 && v.hi >= 0.2,
                ));
            }
        }
        Err(e) => out.push(Check::failed("renewal-factor-5", "x in {0.01, 1, 100}".into(), "", e)),
    }

    let eigen = phase_shift(spec, 1.0, tol).and_then(|th| Ok((th, EigenData::new(spec, 1.0, 0.5, tol)?)));
    match eigen {
        Ok((th, e)) => {
            let bound = 1.0 + th.hi.sin();
            for x in [0.5, 2.0, 8.0] {
                let f = e.eigenfunction(x);
                out.push(Check::new(
                    "eigenfunction-bound",
                    format!("lambda=1 x={x}"),
                    f,
                    format!("within +-{}", num(bound)),
                    f.lo >= -bound && f.hi <= bound,
                ));
            }
        }
        Err(e) => out.push(Check::failed("eigenfunction-bound", "lambda=1".into(), "", e)),
    }
    out
}

pub fn table(checks: &[Check]) -> Table {
    Table {
        header: vec!["check", "argument", "value_lo", "value_hi", "expected", "pass", "note"],
        rows: checks
            .iter()
            .map(|c| {
                vec![
                    c.name.to_string(),
                    c.argument.clone(),
                    num(c.value.lo),
                    num(c.value.hi),
                    c.expected.clone(),
                    c.pass.to_string(),
                    c.note.clone(),
                ]
            })
            .collect(),
    }
}

/// Fixed-width pass/fail table for the terminal.
pub fn render(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        let verdict = if c.pass { "PASS" } else { "FAIL" };
        let _ = write!(s, "{verdict}  {:<20} {:<34} {}", c.name, c.argument, c.value);
        if !c.note.is_empty() {
            let _ = write!(s, "  ({})", c.note);
        }
        s.push('\n');
    }
    let failed = checks.iter().filter(|c| !c.pass).count();
    let _ = writeln!(s, "{} checks, {failed} failed", checks.len());
    s
}
