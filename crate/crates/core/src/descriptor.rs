//! Text descriptors for process specs.
//!
//! A descriptor is one line of whitespace-separated `key=value` pairs:
//!
//! ```text
//! family=stable alpha=1.5
//! family=relativistic alpha=1 m=1
//! family=sum parts=stable:0.5,stable:1.5 weights=1,2
//! family=compose outer=geometric-stable:2 inner=stable:1
//! family=scale-val c=4 part=brownian
//! ```
//!
//! Inside `parts`, `part`, `outer` and `inner`, a leaf family is written
//! `name:p1:p2` with its parameters in the order of the top-level keys.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cbf::{self, Combinator, ProcessSpec, SpecError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DescriptorError {
    #[error("empty descriptor")]
    Empty,
    #[error("malformed token `{0}` (expected key=value)")]
    Token(String),
    #[error("duplicate key `{0}`")]
    DuplicateKey(String),
    #[error("missing key `{0}`")]
    MissingKey(&'static str),
    #[error("unknown key `{key}` for family {family}")]
    UnknownKey { key: String, family: String },
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("bad number `{0}`")]
    Number(String),
    #[error("family {family} takes {expected} parameters, got {got}")]
    Arity { family: String, expected: usize, got: usize },
    #[error("{0} weights for {1} parts")]
    Weights(usize, usize),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

/// Parameter names of the leaf families, in positional order.
const LEAVES: &[(&str, &[&str])] = &[
    ("brownian", &[]),
    ("stable", &["alpha"]),
    ("relativistic", &["alpha", "m"]),
    ("variance-gamma", &[]),
    ("geometric-stable", &["alpha"]),
    ("iterated-geometric", &["alpha", "depth"]),
    ("inverse-log", &["alpha"]),
    ("log-inverse-log", &[]),
    ("subordinate-relativistic", &["alpha", "beta"]),
    ("compound-poisson-laplace", &[]),
    ("series-irregular", &["tol"]),
];

const SERIES_DEFAULT_TOL: f64 = 1e-18;

/// A named family with its parameters in positional order.
#[derive(Clone, Debug, PartialEq)]
pub struct Leaf {
    pub family: String,
    pub params: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Descriptor {
    Leaf(Leaf),
    Sum { parts: Vec<Leaf>, weights: Vec<f64> },
    ScaleArg { c: f64, part: Leaf },
    ScaleVal { c: f64, part: Leaf },
    Compose { outer: Leaf, inner: Leaf },
}

fn number(s: &str) -> Result<f64, DescriptorError> {
    match f64::from_str(s) {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(DescriptorError::Number(s.to_string())),
    }
}

fn param_names(family: &str) -> Result<&'static [&'static str], DescriptorError> {
    LEAVES
        .iter()
        .find(|(n, _)| *n == family)
        .map(|(_, p)| *p)
        .ok_or_else(|| DescriptorError::UnknownFamily(family.to_string()))
}

impl Leaf {
    fn new(family: &str, mut params: Vec<f64>) -> Result<Leaf, DescriptorError> {
        let names = param_names(family)?;
        if family == "series-irregular" && params.is_empty() {
            params.push(SERIES_DEFAULT_TOL);
        }
        if params.len() != names.len() {
            return Err(DescriptorError::Arity { family: family.to_string(), expected: names.len(), got: params.len() });
        }
        Ok(Leaf { family: family.to_string(), params })
    }

    /// Parses the compact `name:p1:p2` form.
    pub fn parse_compact(s: &str) -> Result<Leaf, DescriptorError> {
        let mut it = s.split(':');
        let name = it.next().filter(|n| !n.is_empty()).ok_or_else(|| DescriptorError::Token(s.to_string()))?;
        let params = it.map(number).collect::<Result<Vec<_>, _>>()?;
        Leaf::new(name, params)
    }

    fn shown_params(&self) -> &[f64] {
        if self.family == "series-irregular" && self.params == [SERIES_DEFAULT_TOL] {
            &[]
        } else {
            &self.params
        }
    }

    fn compact(&self) -> String {
        let mut s = self.family.clone();
        for p in self.shown_params() {
            s.push(':');
            s.push_str(&p.to_string());
        }
        s
    }

    pub fn build(&self) -> Result<ProcessSpec, SpecError> {
        let p = &self.params;
        Ok(match self.family.as_str() {
            "brownian" => cbf::brownian(),
            "stable" => cbf::make_stable(p[0])?,
            "relativistic" => cbf::make_relativistic(p[0], p[1])?,
            "variance-gamma" => cbf::make_variance_gamma(),
            "geometric-stable" => cbf::make_geometric_stable(p[0])?,
            "iterated-geometric" => {
                let d = p[1];
                if d.fract() != 0.0 || !(1.0..=8.0).contains(&d) {
                    return Err(SpecError::InvalidParameter { name: "depth", value: d, reason: "must be an integer in 1..=8" });
                }
                cbf::make_iterated_geometric(p[0], d as u32)?
            }
            "inverse-log" => cbf::make_inverse_log(p[0])?,
            "log-inverse-log" => cbf::make_log_inverse_log(),
            "subordinate-relativistic" => cbf::make_subordinate_relativistic(p[0], p[1])?,
            "compound-poisson-laplace" => cbf::make_compound_poisson_laplace(),
            "series-irregular" => cbf::make_series_irregular(p[0])?,
            _ => unreachable!("leaf families are validated on construction"),
        })
    }
}

impl fmt::Display for Leaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "family={}", self.family)?;
        let names = param_names(&self.family).map_err(|_| fmt::Error)?;
        for (n, v) in names.iter().zip(self.shown_params()) {
            write!(f, " {n}={v}")?;
        }
        Ok(())
    }
}

impl fmt::Display for Descriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |v: &[f64]| v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",");
        match self {
            Descriptor::Leaf(l) => write!(f, "{l}"),
            Descriptor::Sum { parts, weights } => {
                let p: Vec<String> = parts.iter().map(Leaf::compact).collect();
                write!(f, "family=sum parts={} weights={}", p.join(","), list(weights))
            }
            Descriptor::ScaleArg { c, part } => write!(f, "family=scale-arg c={c} part={}", part.compact()),
            Descriptor::ScaleVal { c, part } => write!(f, "family=scale-val c={c} part={}", part.compact()),
            Descriptor::Compose { outer, inner } => {
                write!(f, "family=compose outer={} inner={}", outer.compact(), inner.compact())
            }
        }
    }
}

impl FromStr for Descriptor {
    type Err = DescriptorError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_descriptor(s)
    }
}

/// Parses one descriptor line.
pub fn parse_descriptor(line: &str) -> Result<Descriptor, DescriptorError> {
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    for tok in line.split_whitespace() {
        let (k, v) = tok.split_once('=').ok_or_else(|| DescriptorError::Token(tok.to_string()))?;
        if k.is_empty() || v.is_empty() {
            return Err(DescriptorError::Token(tok.to_string()));
        }
        if pairs.iter().any(|(q, _)| *q == k) {
            return Err(DescriptorError::DuplicateKey(k.to_string()));
        }
        pairs.push((k, v));
    }
    if pairs.is_empty() {
        return Err(DescriptorError::Empty);
    }
    let get = |k: &str| pairs.iter().find(|(q, _)| *q == k).map(|(_, v)| *v);
    let family = get("family").ok_or(DescriptorError::MissingKey("family"))?;
    let allowed: Vec<&str> = match family {
        "sum" => vec!["parts", "weights"],
        "scale-arg" | "scale-val" => vec!["c", "part"],
        "compose" => vec!["outer", "inner"],
        other => param_names(other)?.to_vec(),
    };
    for (k, _) in &pairs {
        if *k != "family" && !allowed.contains(k) {
            return Err(DescriptorError::UnknownKey { key: k.to_string(), family: family.to_string() });
        }
    }
    let need = |k: &'static str| get(k).ok_or(DescriptorError::MissingKey(k));
    Ok(match family {
        "sum" => {
            let parts = need("parts")?.split(',').map(Leaf::parse_compact).collect::<Result<Vec<_>, _>>()?;
            let weights = match get("weights") {
                Some(w) => w.split(',').map(number).collect::<Result<Vec<_>, _>>()?,
                None => vec![1.0; parts.len()],
            };
            if weights.len() != parts.len() {
                return Err(DescriptorError::Weights(weights.len(), parts.len()));
            }
            Descriptor::Sum { parts, weights }
        }
        "scale-arg" => Descriptor::ScaleArg { c: number(need("c")?)?, part: Leaf::parse_compact(need("part")?)? },
        "scale-val" => Descriptor::ScaleVal { c: number(need("c")?)?, part: Leaf::parse_compact(need("part")?)? },
        "compose" => Descriptor::Compose {
            outer: Leaf::parse_compact(need("outer")?)?,
            inner: Leaf::parse_compact(need("inner")?)?,
        },
        leaf => {
            let names = param_names(leaf)?;
            let mut params = Vec::with_capacity(names.len());
            for &n in names {
                match get(n) {
                    Some(v) => params.push(number(v)?),
                    None if leaf == "series-irregular" => {}
                    None => return Err(DescriptorError::MissingKey(n)),
                }
            }
            Descriptor::Leaf(Leaf::new(leaf, params)?)
        }
    })
}

impl Descriptor {
    /// Builds the spec, named by the canonical form of this descriptor.
    pub fn build(&self) -> Result<ProcessSpec, DescriptorError> {
        let spec = match self {
            Descriptor::Leaf(l) => l.build()?,
            Descriptor::Sum { parts, weights } => {
                let specs = parts.iter().map(Leaf::build).collect::<Result<Vec<_>, _>>()?;
                cbf::combine(Combinator::Sum, &specs, weights)?
            }
            Descriptor::ScaleArg { c, part } => cbf::combine(Combinator::ScaleArg, &[part.build()?], &[*c])?,
            Descriptor::ScaleVal { c, part } => cbf::combine(Combinator::ScaleVal, &[part.build()?], &[*c])?,
            Descriptor::Compose { outer, inner } => cbf::combine(Combinator::Compose, &[outer.build()?, inner.build()?], &[])?,
        };
        Ok(spec.with_name(self.to_string()))
    }
}

/// Parses and builds a descriptor line.
pub fn make_catalog_family(line: &str) -> Result<ProcessSpec, DescriptorError> {
    parse_descriptor(line)?.build()
}

/// Parses a descriptor file: one descriptor per line, `#` starts a comment.
pub fn parse_descriptor_file(text: &str) -> Result<Vec<Descriptor>, (usize, DescriptorError)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| parse_descriptor(l).map_err(|e| (i + 1, e)))
        .collect()
}
