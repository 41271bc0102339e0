//! Command-line front end for first-passage computations: `fpt COMMAND key=value ...`.

pub mod config;
pub mod run;
pub mod validate;

pub use config::{Command, DescriptorSource, Grid, ParseError, RunConfig};
pub use run::{main_with_args, run, CliError, Report, Table};
