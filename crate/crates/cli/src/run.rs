//! Executes a [`RunConfig`] and produces a CSV table.

use std::fs;
use std::io::Write;
use std::path::Path;

use fpt_core::cbf::ProcessSpec;
use fpt_core::dagger::dagger;
use fpt_core::descriptor::parse_descriptor_file;
use fpt_core::oracle::{mc_survival, McConfig, Subordinator};
use fpt_core::passage::Survival;
use fpt_core::spectral::{phase_shift, phase_shift_bounds, EigenData, RenewalEval};
use fpt_core::{Enclosure, FptError};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{Command, DescriptorSource, Grid, ParseError, RunConfig};
use crate::validate;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_CONDITION: i32 = 3;
pub const EXIT_TOLERANCE: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("{path}:{line}: {message}")]
    DescriptorFile { path: String, line: usize, message: String },
    #[error("{0}")]
    Compute(#[from] FptError),
    #[error("{failed} of {total} validation checks failed")]
    Validation { failed: usize, total: usize, condition_only: bool },
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) | CliError::DescriptorFile { .. } => EXIT_PARSE,
            CliError::Compute(e) => match e {
                FptError::Condition(_) | FptError::Resonance { .. } => EXIT_CONDITION,
                FptError::Quadrature { .. } => EXIT_TOLERANCE,
                FptError::Spec(_) | FptError::InvalidInput(_) | FptError::Unsupported(_) => EXIT_PARSE,
            },
            CliError::Validation { condition_only: true, .. } => EXIT_CONDITION,
            CliError::Validation { .. } => EXIT_TOLERANCE,
            CliError::Io(_) | CliError::Csv(_) => EXIT_IO,
        }
    }
}

/// Header plus rows, all already formatted.
#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(header: &[&'static str]) -> Table {
        Table { header: header.to_vec(), rows: Vec::new() }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), CliError> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(&self.header)?;
        for r in &self.rows {
            out.write_record(r)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Shortest representation that parses back to the same `f64`, so printed
/// enclosure endpoints are exact.
pub fn num(v: f64) -> String {
    format!("{v:e}")
}

fn bool_cell(b: Option<bool>) -> String {
    match b {
        Some(true) => "true".into(),
        Some(false) => "false".into(),
        None => "unchecked".into(),
    }
}

pub fn resolve_spec(source: &DescriptorSource) -> Result<ProcessSpec, CliError> {
    let d = match source {
        DescriptorSource::Inline(d) => d.clone(),
        DescriptorSource::File { path, index } => {
            let text = fs::read_to_string(path)?;
            let shown = path.display().to_string();
            let all = parse_descriptor_file(&text).map_err(|(line, e)| CliError::DescriptorFile {
                path: shown.clone(),
                line,
                message: e.to_string(),
            })?;
            let count = all.len();
            all.into_iter().nth(*index).ok_or_else(|| CliError::DescriptorFile {
                path: shown,
                line: 0,
                message: format!("entry {index} requested but the file has {count}"),
            })?
        }
    };
    d.build().map_err(|e| ParseError::Descriptor(e).into())
}

/// Evaluates `f` on every point in parallel; the first error in grid order wins.
fn par_rows<T: Sync, F>(points: &[T], f: F) -> Result<Vec<Vec<String>>, CliError>
where
    F: Fn(&T) -> Result<Vec<Vec<String>>, FptError> + Sync + Send,
{
    let parts: Vec<_> = points.par_iter().map(f).collect();
    let mut rows = Vec::new();
    for p in parts {
        rows.extend(p?);
    }
    Ok(rows)
}

fn grid(g: Option<Grid>) -> Vec<f64> {
    g.map(|g| g.points()).unwrap_or_default()
}

fn enc(e: Enclosure) -> [String; 2] {
    [num(e.lo), num(e.hi)]
}

/// Outcome of a run. `summary` is printed for humans; `failure` carries a
/// validation verdict that still produced a table.
pub struct Report {
    pub table: Table,
    pub summary: Option<String>,
    pub failure: Option<CliError>,
}

pub fn run(cfg: &RunConfig) -> Result<Report, CliError> {
    let spec = resolve_spec(&cfg.descriptor)?;
    let mut summary = None;
    let mut failure = None;
    let table = match cfg.command {
        Command::EvalPsi => {
            let mut t = Table::new(&["xi", "psi", "dpsi", "d2psi"]);
            for xi in grid(cfg.xi) {
                let (p, d1, d2) = spec.eval3(xi);
                t.rows.push(vec![num(xi), num(p), num(d1), num(d2)]);
            }
            t
        }
        Command::Dagger => {
            let mut t = Table::new(&["xi", "value_lo", "value_hi", "sqrt_psi"]);
            t.rows = par_rows(&grid(cfg.xi), |&xi| {
                let [lo, hi] = enc(dagger(&spec, xi, cfg.tol)?);
                Ok(vec![vec![num(xi), lo, hi, num(spec.eval(xi * xi).sqrt())]])
            })?;
            t
        }
        Command::PhaseShift => {
            let mut t = Table::new(&["lambda", "value_lo", "value_hi", "bound_lo", "bound_hi"]);
            t.rows = par_rows(&grid(cfg.lambda), |&l| {
                let [lo, hi] = enc(phase_shift(&spec, l, cfg.tol)?);
                let b = phase_shift_bounds(&spec, l);
                Ok(vec![vec![num(l), lo, hi, num(b.lower.max(b.global_lower)), num(b.upper.min(b.global_upper))]])
            })?;
            t
        }
        Command::Eigenfunction => {
            let mut t = Table::new(&["lambda", "x", "value_lo", "value_hi"]);
            let xs = grid(cfg.x);
            let x_min = cfg.x.map_or(0.0, |g| g.min());
            t.rows = par_rows(&grid(cfg.lambda), |&l| {
                let e = EigenData::new(&spec, l, x_min, cfg.tol)?;
                Ok(xs
                    .iter()
                    .map(|&x| {
                        let [lo, hi] = enc(e.eigenfunction(x));
                        vec![num(l), num(x), lo, hi]
                    })
                    .collect())
            })?;
            t
        }
        Command::Renewal => {
            let mut t = Table::new(&["x", "value_lo", "value_hi"]);
            let r = RenewalEval::new(&spec, cfg.tol)?;
            for x in grid(cfg.x) {
                let [lo, hi] = enc(r.value(x));
                t.rows.push(vec![num(x), lo, hi]);
            }
            t
        }
        Command::Survival | Command::Density => survival_table(cfg, &spec)?,
        Command::Mc => mc_table(cfg, &spec)?,
        Command::Validate => {
            let checks = validate::run_suite(&spec, cfg.tol);
            summary = Some(validate::render(&checks));
            let failed: Vec<_> = checks.iter().filter(|c| !c.pass).collect();
            if !failed.is_empty() {
                let condition_only = failed.iter().all(|c| c.name == validate::CONDITION_CHECK);
                failure = Some(CliError::Validation { failed: failed.len(), total: checks.len(), condition_only });
            }
            validate::table(&checks)
        }
    };
    Ok(Report { table, summary, failure })
}

fn survival_table(cfg: &RunConfig, spec: &ProcessSpec) -> Result<Table, CliError> {
    let density = cfg.command == Command::Density;
    let header: &[&'static str] = if density {
        &["t", "x", "value_lo", "value_hi", "tail_bound", "cond_a1", "cond_a2"]
    } else {
        &["t", "x", "n", "value_lo", "value_hi", "tail_bound", "cond_a1", "cond_a2"]
    };
    let mut table = Table::new(header);
    let x_grid = cfg.x.expect("checked by the parser");
    let engine = Survival::new(spec, x_grid.min().max(f64::MIN_POSITIVE))?;
    let xs = x_grid.points();
    let pairs: Vec<(f64, f64)> = grid(cfg.t).into_iter().flat_map(|t| xs.iter().map(move |&x| (t, x))).collect();
    table.rows = par_rows(&pairs, |&(t, x)| {
        let r = engine.eval(x, t, cfg.n, cfg.tol, cfg.t0)?;
        let [lo, hi] = enc(r.value);
        let mut row = vec![num(t), num(x)];
        if !density {
            row.push(cfg.n.to_string());
        }
        row.extend([lo, hi, num(r.tail_bound), bool_cell(Some(r.cond_a1)), bool_cell(r.cond_a2)]);
        Ok(vec![row])
    })?;
    Ok(table)
}

fn mc_table(cfg: &RunConfig, spec: &ProcessSpec) -> Result<Table, CliError> {
    let mut table = Table::new(&["t", "x", "p_hat", "std_err", "paths"]);
    let sampler = Subordinator::for_spec(spec)?;
    let ts = grid(cfg.t);
    let horizon = cfg.t.expect("checked by the parser").max();
    let xs = grid(cfg.x);
    let mut per_x = Vec::with_capacity(xs.len());
    for &x in &xs {
        let c = McConfig { paths: cfg.paths, step: cfg.step, horizon, seed: cfg.seed, barrier: x, sampler };
        per_x.push(mc_survival(&c, &ts)?);
    }
    for (i, &t) in ts.iter().enumerate() {
        for (j, &x) in xs.iter().enumerate() {
            let e = &per_x[j][i];
            table.rows.push(vec![num(t), num(x), num(e.p_hat), num(e.std_err), e.paths.to_string()]);
        }
    }
    Ok(table)
}

pub fn write_output(cfg: &RunConfig, table: &Table) -> Result<(), CliError> {
    match &cfg.output {
        Some(path) => table.write_csv(fs::File::create(path)?),
        None => table.write_csv(std::io::stdout().lock()),
    }
}

/// Gnuplot script plotting the value columns of `csv_path` against `t`.
pub fn plot_script(cfg: &RunConfig, csv_path: &Path) -> String {
    let data = csv_path.display();
    let (lo, hi, ylabel, xcol) = match cfg.command {
        Command::Survival => (4, 5, format!("(-1)^{} d^{}/dt^{} P(tau_x > t)", cfg.n, cfg.n, cfg.n), 1),
        Command::Density => (3, 4, "d/dt P(tau_x < t)".to_string(), 1),
        Command::Mc => (3, 3, "P(tau_x > t), Monte Carlo".to_string(), 1),
        Command::Renewal => (2, 3, "V(x)".to_string(), 1),
        Command::PhaseShift => (2, 3, "phase shift".to_string(), 1),
        Command::Eigenfunction => (3, 4, "F_lambda(x)".to_string(), 2),
        Command::Dagger => (2, 3, "psi dagger".to_string(), 1),
        Command::EvalPsi | Command::Validate => (2, 2, "psi".to_string(), 1),
    };
    let xlabel = cfg.command.required_grids().first().copied().unwrap_or("xi");
    let xlabel = if cfg.command == Command::Eigenfunction { "x" } else { xlabel };
    format!(
        "set datafile separator ','\n\
         set key autotitle columnhead\n\
         set xlabel '{xlabel}'\n\
         set ylabel '{ylabel}'\n\
         set logscale x\n\
         plot '{data}' using {xcol}:(((${lo})+(${hi}))/2) with lines lc rgb 'black' notitle, \\\n\
         \x20    '' using {xcol}:{lo}:{hi} with filledcurves lc rgb 'gray' notitle\n"
    )
}

pub fn write_plot(cfg: &RunConfig) -> Result<(), CliError> {
    if let (Some(plot), Some(out)) = (&cfg.plot, &cfg.output) {
        fs::write(plot, plot_script(cfg, out))?;
    }
    Ok(())
}

/// Parses `args`, runs, writes outputs, and returns the exit code.
pub fn main_with_args<S: AsRef<str>>(args: &[S]) -> i32 {
    let result = RunConfig::parse(args).map_err(CliError::from).and_then(|cfg| {
        let report = run(&cfg)?;
        if let Some(s) = &report.summary {
            print!("{s}");
            if cfg.output.is_some() {
                write_output(&cfg, &report.table)?;
            }
        } else {
            write_output(&cfg, &report.table)?;
        }
        write_plot(&cfg)?;
        report.failure.map_or(Ok(()), Err)
    });
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("fpt: {e}");
            e.exit_code()
        }
    }
}
