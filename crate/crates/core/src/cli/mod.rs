//! Command-line harness. Every subcommand reads one JSON config, writes one
//! CSV or JSON document and maps the outcome to an exit code:
//! 0 when all budgets are met, 1 on numerical failure, 2 on usage errors.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::error::Error;

pub use commands::{cmd_convergence, cmd_matrix, cmd_reconstruct, cmd_spectrum, cmd_verify, Outcome, VerifyEntry};
pub use config::RunConfig;

/// Environment variable capping the worker threads.
pub const THREADS_ENV: &str = "S2M_THREADS";
/// Seed used by random matrix suites when `--seed` is absent.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Numerical(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(e) if !is_precondition(e) => 1,
            _ => 2,
        }
    }
}

/// Errors that mean the request itself was unusable, as opposed to a
/// computation that went wrong.
pub fn is_precondition(e: &Error) -> bool {
    matches!(
        e,
        Error::NotHermitian { .. }
            | Error::Dimension(_)
            | Error::Index { .. }
            | Error::Shape(_)
            | Error::PoleProximity { .. }
            | Error::Domain(_)
            | Error::InvalidPotential(_)
            | Error::TruncationTooSmall(_)
    )
}

#[derive(Debug, Parser)]
#[command(name = "s2m", version, about = "Squared eigenfunction values from two Dirichlet spectra")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone)]
pub struct CommonArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file; stdout when absent and the config names none.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Eigenvector-eigenvalue identity over every (k, l) of a matrix or a random suite.
    Matrix {
        #[command(flatten)]
        common: CommonArgs,
        /// Seed for the random matrix suite.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Full and split Dirichlet spectra.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Squared eigenfunction values from the two spectra.
    Reconstruct {
        #[command(flatten)]
        common: CommonArgs,
        /// Add direct-eigenfunction oracle columns.
        #[arg(long)]
        oracle: bool,
    },
    /// Resolvent, trace and spectral-shift identity checks as a JSON report.
    Verify {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Truncation sweeps in long CSV format.
    Convergence {
        #[command(flatten)]
        common: CommonArgs,
    },
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Matrix { common, .. }
            | Command::Spectrum { common }
            | Command::Reconstruct { common, .. }
            | Command::Verify { common }
            | Command::Convergence { common } => common,
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    // a second call in the same process keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn load_config(command: &Command) -> Result<RunConfig, CliError> {
    let path = &command.common().config;
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    if let Command::Matrix { .. } = command {
        // a bare matrix file is accepted in place of a full config
        let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| CliError::Config(e.to_string()))?;
        if value.get("n").is_some() {
            let matrix = serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
            return Ok(RunConfig { matrix: Some(matrix), ..RunConfig::default() });
        }
    }
    RunConfig::from_json(&text)
}

fn execute(command: &Command) -> Result<Outcome, CliError> {
    configure_threads()?;
    let cfg = load_config(command)?;
    let outcome = match command {
        Command::Matrix { seed, .. } => cmd_matrix(&cfg, seed.unwrap_or(DEFAULT_SEED))?,
        Command::Spectrum { .. } => cmd_spectrum(&cfg)?,
        Command::Reconstruct { oracle, .. } => cmd_reconstruct(&cfg, *oracle)?,
        Command::Verify { .. } => cmd_verify(&cfg)?,
        Command::Convergence { .. } => cmd_convergence(&cfg)?,
    };
    let target = command.common().out.clone().or_else(|| cfg.output.as_ref().map(PathBuf::from));
    match target {
        Some(path) => {
            std::fs::write(&path, &outcome.output).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?
        }
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(outcome.output.as_bytes()).map_err(|e| CliError::Io(e.to_string()))?;
        }
    }
    Ok(outcome)
}

/// Parses `args` (program name first), runs the subcommand and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(outcome) => {
            for f in &outcome.failures {
                eprintln!("FAIL {f}");
            }
            i32::from(!outcome.failures.is_empty())
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
