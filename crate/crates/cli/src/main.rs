//! `vslab`: experiment runner for value-set statistics of polynomial families.
//!
//! Exit codes: 0 all checks passed, 1 a verification failed, 2 usage or
//! configuration error.

mod commands;
mod output;
mod settings;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::commands::Outcome;
use crate::settings::{Opts, Settings};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    SchemaMismatch(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage: {m}"),
            CliError::Io(m) => write!(f, "io: {m}"),
            CliError::SchemaMismatch(m) => write!(f, "schema mismatch: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "vslab", version, about = "Exact value-set statistics of polynomial families over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact mean number of distinct values, with its main-term residual.
    Mean(Opts),
    /// Exact second moment and its reconstructions.
    SecondMoment(Opts),
    /// Subset counts chi_r for r above d - s.
    Chi(Opts),
    /// Pair counts S_mn for 1 <= m, n <= d.
    Smn(Opts),
    /// Point counts of the incidence varieties and their closures.
    Gamma(Opts),
    /// Check the mean and second-moment reconstructions against brute force.
    VerifyIdentities(Opts),
    /// Evaluate every bound on every family.
    VerifyBounds(Opts),
    /// One row per family: mean, chi and bound verdicts.
    Sweep(Opts),
    /// Discriminant and first-subresultant closed forms.
    Appendix(Opts),
    /// Rank and solution counts of random interpolation systems.
    AuditLinear(Opts),
    /// Concatenate CSV reports sharing one header.
    Merge {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn finish<T: Serialize>(name: &str, st: &Settings, outcome: Outcome<T>) -> Result<bool, CliError> {
    output::emit(name, st.seed, st.out.as_ref(), &outcome.rows)?;
    for f in &outcome.failures {
        eprintln!("FAILED {f}");
    }
    Ok(outcome.failures.is_empty())
}

fn run_with<T: Serialize + Send>(
    name: &str,
    opts: Opts,
    job: fn(&Settings) -> Result<Outcome<T>, CliError>,
) -> Result<bool, CliError> {
    let st = opts.resolve()?;
    let outcome = match st.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| job(&st))?,
        None => job(&st)?,
    };
    finish(name, &st, outcome)
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Mean(o) => run_with("mean", o, commands::mean),
        Command::SecondMoment(o) => run_with("second-moment", o, commands::second_moment),
        Command::Chi(o) => run_with("chi", o, commands::chi),
        Command::Smn(o) => run_with("smn", o, commands::smn),
        Command::Gamma(o) => run_with("gamma", o, commands::gamma),
        Command::VerifyIdentities(o) => run_with("verify-identities", o, commands::verify_identities),
        Command::VerifyBounds(o) => run_with("verify-bounds", o, commands::verify_bounds),
        Command::Sweep(o) => run_with("sweep", o, commands::sweep),
        Command::Appendix(o) => run_with("appendix", o, commands::appendix),
        Command::AuditLinear(o) => run_with("audit-linear", o, commands::audit_linear),
        Command::Merge { paths, out } => {
            let n = output::merge(&paths, out.as_ref())?;
            eprintln!("merged {n} rows from {} files", paths.len());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("vslab: {e}");
            ExitCode::from(2)
        }
    }
}
