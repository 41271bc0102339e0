//! Run configuration: the command word, a process descriptor, and
//! `key=value` settings such as grids written `start..stopxCOUNT[log]`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use fpt_core::descriptor::{parse_descriptor, Descriptor, DescriptorError};
use fpt_core::passage::MAX_ORDER;
use thiserror::Error;

/// Largest accepted grid; keeps a typo like `x1e9` from allocating gigabytes.
pub const MAX_GRID_POINTS: usize = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ParseError {
    #[error("empty command line")]
    Empty,
    #[error("unknown command `{0}`")]
    Command(String),
    #[error("token `{0}` is not of the form key=value")]
    Token(String),
    #[error("`{0}` given twice")]
    Duplicate(String),
    #[error("grid `{text}`: {reason}")]
    Grid { text: String, reason: &'static str },
    #[error("`{key}={value}`: {reason}")]
    Value { key: &'static str, value: String, reason: &'static str },
    #[error("{command} needs `{key}=`")]
    Missing { command: Command, key: &'static str },
    #[error("descriptor: {0}")]
    Descriptor(#[from] DescriptorError),
    #[error("give either inline descriptor keys or `file=`, not both")]
    DescriptorSource,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    EvalPsi,
    Dagger,
    PhaseShift,
    Eigenfunction,
    Renewal,
    Survival,
    Density,
    Validate,
    Mc,
}

impl Command {
    pub const ALL: [Command; 9] = [
        Command::EvalPsi,
        Command::Dagger,
        Command::PhaseShift,
        Command::Eigenfunction,
        Command::Renewal,
        Command::Survival,
        Command::Density,
        Command::Validate,
        Command::Mc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::EvalPsi => "eval-psi",
            Command::Dagger => "dagger",
            Command::PhaseShift => "phase-shift",
            Command::Eigenfunction => "eigenfunction",
            Command::Renewal => "renewal",
            Command::Survival => "survival",
            Command::Density => "density",
            Command::Validate => "validate",
            Command::Mc => "mc",
        }
    }

    /// Grid keys the command cannot run without.
    pub fn required_grids(self) -> &'static [&'static str] {
        match self {
            Command::EvalPsi | Command::Dagger => &["xi"],
            Command::PhaseShift => &["lambda"],
            Command::Eigenfunction => &["lambda", "x"],
            Command::Renewal => &["x"],
            Command::Survival | Command::Density | Command::Mc => &["t", "x"],
            Command::Validate => &[],
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        Command::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| ParseError::Command(s.to_string()))
    }
}

/// `count` points from `start` to `stop`, evenly spaced in value or in log.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    pub log: bool,
}

impl Grid {
    pub fn single(v: f64) -> Grid {
        Grid { start: v, stop: v, count: 1, log: false }
    }

    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        let mut out: Vec<f64> = (0..self.count)
            .map(|i| {
                let w = i as f64 / last;
                if self.log {
                    (self.start.ln() + w * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + w * (self.stop - self.start)
                }
            })
            .collect();
        out[0] = self.start;
        out[self.count - 1] = self.stop;
        out
    }

    pub fn min(&self) -> f64 {
        self.start.min(self.stop)
    }

    pub fn max(&self) -> f64 {
        self.start.max(self.stop)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.count == 1 {
            return write!(f, "{}", self.start);
        }
        write!(f, "{}..{}x{}{}", self.start, self.stop, self.count, if self.log { "log" } else { "" })
    }
}

fn grid_err(text: &str, reason: &'static str) -> ParseError {
    ParseError::Grid { text: text.to_string(), reason }
}

fn finite(text: &str, s: &str) -> Result<f64, ParseError> {
    let v: f64 = s.parse().map_err(|_| grid_err(text, "endpoint is not a number"))?;
    if !v.is_finite() {
        return Err(grid_err(text, "endpoint is not finite"));
    }
    Ok(v)
}

impl FromStr for Grid {
    type Err = ParseError;

    /// Accepts a single number or `start..stopxCOUNT` with an optional `log` suffix.
    fn from_str(text: &str) -> Result<Self, ParseError> {
        let Some((start, rest)) = text.split_once("..") else {
            return Ok(Grid::single(finite(text, text)?));
        };
        let (body, log) = match rest.strip_suffix("log") {
            Some(b) => (b, true),
            None => (rest, false),
        };
        let (stop, count) = body.rsplit_once('x').ok_or_else(|| grid_err(text, "missing `xCOUNT`"))?;
        let count: usize = count.parse().map_err(|_| grid_err(text, "count is not a positive integer"))?;
        let g = Grid { start: finite(text, start)?, stop: finite(text, stop)?, count, log };
        if count == 0 {
            return Err(grid_err(text, "count must be at least 1"));
        }
        if count > MAX_GRID_POINTS {
            return Err(grid_err(text, "count exceeds the grid limit"));
        }
        if count == 1 && g.start != g.stop {
            return Err(grid_err(text, "a one-point grid needs start = stop"));
        }
        if log && (g.start <= 0.0 || g.stop <= 0.0) {
            return Err(grid_err(text, "log grids need positive endpoints"));
        }
        Ok(g)
    }
}

/// Where the process descriptor comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum DescriptorSource {
    Inline(Descriptor),
    /// Entry `index` (0-based, comments skipped) of a descriptor file.
    File { path: PathBuf, index: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub descriptor: DescriptorSource,
    pub t: Option<Grid>,
    pub x: Option<Grid>,
    pub lambda: Option<Grid>,
    pub xi: Option<Grid>,
    /// Order of the time derivative; `density` forces 1.
    pub n: u32,
    pub tol: f64,
    pub t0: Option<f64>,
    pub output: Option<PathBuf>,
    /// Companion gnuplot script, written next to `output`.
    pub plot: Option<PathBuf>,
    pub seed: u64,
    pub paths: u64,
    pub step: f64,
}

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_PATHS: u64 = 10_000;
pub const DEFAULT_STEP: f64 = 1e-3;

fn value_err(key: &'static str, value: &str, reason: &'static str) -> ParseError {
    ParseError::Value { key, value: value.to_string(), reason }
}

fn positive(key: &'static str, v: &str) -> Result<f64, ParseError> {
    let x: f64 = v.parse().map_err(|_| value_err(key, v, "not a number"))?;
    if !(x > 0.0 && x.is_finite()) {
        return Err(value_err(key, v, "must be positive and finite"));
    }
    Ok(x)
}

impl RunConfig {
    /// Parses `command key=value ...`. Keys the front end does not own are
    /// handed to the descriptor parser, so `family=stable alpha=1` works inline.
    pub fn parse<S: AsRef<str>>(args: &[S]) -> Result<RunConfig, ParseError> {
        let (first, rest) = args.split_first().ok_or(ParseError::Empty)?;
        let command: Command = first.as_ref().parse()?;
        let mut seen: Vec<String> = Vec::new();
        let mut desc_tokens: Vec<&str> = Vec::new();
        let mut cfg = RunConfig {
            command,
            descriptor: DescriptorSource::File { path: PathBuf::new(), index: 0 },
            t: None,
            x: None,
            lambda: None,
            xi: None,
            n: 0,
            tol: DEFAULT_TOL,
            t0: None,
            output: None,
            plot: None,
            seed: 0,
            paths: DEFAULT_PATHS,
            step: DEFAULT_STEP,
        };
        let mut file: Option<PathBuf> = None;
        let mut index = 0usize;
        let mut n_given = false;
        for tok in rest {
            let tok = tok.as_ref();
            let (k, v) = tok.split_once('=').ok_or_else(|| ParseError::Token(tok.to_string()))?;
            if seen.iter().any(|s| s == k) {
                return Err(ParseError::Duplicate(k.to_string()));
            }
            seen.push(k.to_string());
            match k {
                "t" => cfg.t = Some(v.parse()?),
                "x" => cfg.x = Some(v.parse()?),
                "lambda" => cfg.lambda = Some(v.parse()?),
                "xi" => cfg.xi = Some(v.parse()?),
                "n" => {
                    let n: u32 = v.parse().map_err(|_| value_err("n", v, "not a nonnegative integer"))?;
                    if n > MAX_ORDER {
                        return Err(value_err("n", v, "derivative order too large"));
                    }
                    cfg.n = n;
                    n_given = true;
                }
                "tol" => cfg.tol = positive("tol", v)?,
                "t0" => cfg.t0 = Some(positive("t0", v)?),
                "out" => cfg.output = Some(PathBuf::from(v)),
                "plot" => cfg.plot = Some(PathBuf::from(v)),
                "seed" => cfg.seed = v.parse().map_err(|_| value_err("seed", v, "not an unsigned integer"))?,
                "paths" => {
                    cfg.paths = v.parse().map_err(|_| value_err("paths", v, "not an unsigned integer"))?;
                    if cfg.paths == 0 {
                        return Err(value_err("paths", v, "need at least one path"));
                    }
                }
                "step" => cfg.step = positive("step", v)?,
                "file" => file = Some(PathBuf::from(v)),
                "index" => index = v.parse().map_err(|_| value_err("index", v, "not an unsigned integer"))?,
                _ => desc_tokens.push(tok),
            }
        }
        cfg.descriptor = match (file, desc_tokens.is_empty()) {
            (Some(_), false) => return Err(ParseError::DescriptorSource),
            (Some(path), true) => DescriptorSource::File { path, index },
            (None, _) => DescriptorSource::Inline(parse_descriptor(&desc_tokens.join(" "))?),
        };
        if command == Command::Density {
            if n_given && cfg.n != 1 {
                return Err(value_err("n", &cfg.n.to_string(), "density is the first derivative"));
            }
            cfg.n = 1;
        }
        for &key in command.required_grids() {
            let present = match key {
                "t" => cfg.t.is_some(),
                "x" => cfg.x.is_some(),
                "lambda" => cfg.lambda.is_some(),
                _ => cfg.xi.is_some(),
            };
            if !present {
                return Err(ParseError::Missing { command, key });
            }
        }
        let positive_grid = |g: &Option<Grid>| g.map_or(true, |g| g.min() > 0.0);
        if !positive_grid(&cfg.t) || !positive_grid(&cfg.lambda) || !positive_grid(&cfg.xi) {
            return Err(value_err("grid", "", "t, lambda and xi grids must be positive"));
        }
        if !cfg.x.map_or(true, |g| g.min() >= 0.0) {
            return Err(value_err("x", "", "barriers must be nonnegative"));
        }
        if cfg.plot.is_some() && cfg.output.is_none() {
            return Err(value_err("plot", "", "a plot script needs `out=`"));
        }
        Ok(cfg)
    }

    /// Splits on whitespace and parses; used for one-line configurations.
    pub fn parse_line(line: &str) -> Result<RunConfig, ParseError> {
        let tokens: Vec<&str> = line.split_whitespace().collect();
        RunConfig::parse(&tokens)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn log_grid_endpoints() {
        let g: Grid = "0.1..10x50log".parse().unwrap();
        let p = g.points();
        assert_eq!(p.len(), 50);
        assert_eq!(p[0], 0.1);
        assert_eq!(p[49], 10.0);
        assert!((p[1] / p[0] - p[49] / p[48]).abs() < 1e-12);
    }

    #[test]
    fn scalar_grid() {
        assert_eq!("2.5".parse::<Grid>().unwrap(), Grid::single(2.5));
    }

    #[test]
    fn rejects_bad_grids() {
        for s in ["1..2", "1..2x0", "0..1x3log", "a..1x2", "1..2x3lin", "1..2x1", "inf"] {
            assert!(s.parse::<Grid>().is_err(), "{s}");
        }
    }

    #[test]
    fn survival_example_line() {
        let c = RunConfig::parse_line("survival family=stable alpha=1 x=1 t=0.1..10x50log n=0 tol=1e-6").unwrap();
        assert_eq!(c.command, Command::Survival);
        assert_eq!(c.t.unwrap().count, 50);
        assert_eq!(c.tol, 1e-6);
        match c.descriptor {
            DescriptorSource::Inline(d) => assert_eq!(d.to_string(), "family=stable alpha=1"),
            _ => panic!(),
        }
    }

    #[test]
    fn missing_grid() {
        let e = RunConfig::parse_line("survival family=brownian x=1").unwrap_err();
        assert_eq!(e, ParseError::Missing { command: Command::Survival, key: "t" });
    }

    #[test]
    fn density_forces_first_order() {
        let c = RunConfig::parse_line("density family=brownian x=1 t=1").unwrap();
        assert_eq!(c.n, 1);
        assert!(RunConfig::parse_line("density family=brownian x=1 t=1 n=2").is_err());
    }

    #[test]
    fn typo_reaches_descriptor_parser() {
        let e = RunConfig::parse_line("renewal family=stable alpah=1 x=1").unwrap_err();
        assert!(matches!(e, ParseError::Descriptor(_)), "{e:?}");
    }
}
