//! Command-line front end for `branchmix`: every command produces a
//! [`Table`](table::Table) written as CSV or JSON.

pub mod args;
pub mod commands;
pub mod table;

use std::io::Write;

use branchmix::Base;

use crate::args::{Cli, Command, Format};
use crate::table::Table;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const VALIDATION_FAILED: i32 = 1;
    pub const CONFIG: i32 = 2;
    pub const DOMAIN: i32 = 3;
    pub const IO: i32 = 4;
}

/// Command-line syntax errors never get here: clap rejects them (exit 2)
/// before a command runs.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Domain(#[from] branchmix::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Domain(branchmix::Error::Schedule(_)) => exit::CONFIG,
            CliError::Domain(_) => exit::DOMAIN,
            CliError::Io(_) => exit::IO,
        }
    }
}

pub struct Outcome {
    pub table: Table,
    /// Number of validation targets outside their tolerance.
    pub failures: usize,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.failures > 0 {
            exit::VALIDATION_FAILED
        } else {
            exit::OK
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let s = &cli.shared;
    let base = Base::new(s.mu, s.sigma)?;
    let spec = &s.schedule;
    let table = match &cli.command {
        Command::Density { x, n_list } => {
            commands::density_table(&base, spec, x, n_list.as_ref().map(|l| &l.0[..]))?
        }
        Command::Exceed { k, n_list } => {
            commands::exceed_table(&base, spec, &k.0, n_list.as_ref().map(|l| &l.0[..]))?
        }
        Command::RatioTable { a, n_list, k } => {
            commands::ratio_table(&base, &a.0, &n_list.0, &k.0)?
        }
        Command::Moments { orders } => commands::moments_table(&base, spec, &orders.0)?,
        Command::Loglog {
            x,
            n_list,
            half_width,
        } => commands::loglog_table(
            &base,
            spec,
            x,
            n_list.as_ref().map(|l| &l.0[..]),
            *half_width,
        )?,
        Command::Validate {
            n_samples,
            orders,
            k,
            self_test,
        } => {
            let v =
                commands::validate(&base, spec, *n_samples, s.seed, &orders.0, &k.0, *self_test)?;
            return Ok(Outcome {
                table: v.table,
                failures: v.failures,
            });
        }
    };
    Ok(Outcome { table, failures: 0 })
}

pub fn render(table: &Table, format: Format) -> String {
    match format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    }
}

/// Runs a parsed command line, writes its output, and returns the exit code.
pub fn main_with(cli: &Cli) -> i32 {
    let result = run(cli).and_then(|outcome| {
        let text = render(&outcome.table, cli.shared.format);
        match &cli.shared.out {
            Some(path) => std::fs::write(path, text)?,
            None => std::io::stdout().lock().write_all(text.as_bytes())?,
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => {
            if outcome.failures > 0 {
                eprintln!("{} validation target(s) failed", outcome.failures);
            }
            outcome.exit_code()
        }
        Err(e) => {
            eprintln!("branchmix: {e}");
            e.exit_code()
        }
    }
}
