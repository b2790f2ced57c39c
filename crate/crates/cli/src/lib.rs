//! Command-line front end for `branch-bayes`.
//!
//! Every subcommand echoes its resolved configuration. JSON output carries it
//! under `"config"`; CSV output starts with `# key=value` comment lines.
//! Experiments print one JSON object per line, the first being the config.
//!
//! Exit codes: 0 on success, 1 for usage errors and malformed input, 2 when
//! the numerics fail.

mod commands;
mod error;
mod pathfile;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub use error::CliError;
pub use pathfile::{parse_path, read_path};

/// Caps the number of worker threads. Output does not depend on it.
pub const THREADS_ENV: &str = "BRANCH_BAYES_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "branch-bayes",
    version,
    about = "Estimation for binary branching processes"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Seed for every stochastic step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,

    /// Write to this file instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a path `x_0..x_n`.
    Simulate(SimulateArgs),
    /// Joint posterior of `(X_0, U)` given an observed path.
    Posterior(PosteriorArgs),
    /// Limit posterior `mu(r, x)` of `X_0`.
    Limit(ParamArgs),
    /// Law of the hitting-time estimator `eta_x`.
    Hitting(ParamArgs),
    /// Kolmogorov-Smirnov check of the Gaussian limit of `xi_x` or `eta_x`.
    Clt(CltArgs),
    /// Convergence of the joint posterior along one simulated path.
    Consistency(ConsistencyArgs),
    /// Monte Carlo check of the Fisher information of `U`.
    Fisher(FisherArgs),
    /// Bayesian against naive prediction of `X_0` from `X_1 = 2`.
    Compare(CompareArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long)]
    pub x0: u64,
    #[arg(long)]
    pub u: f64,
    /// Number of generations after the origin.
    #[arg(long)]
    pub n: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct PosteriorArgs {
    #[arg(long)]
    pub path_file: PathBuf,
    /// Whether the first value is `x_0`; overrides any marker in the file.
    #[arg(long)]
    pub origin_included: Option<bool>,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("param").required(true).args(["u", "r"])))]
pub struct ParamArgs {
    #[arg(long)]
    pub u: Option<f64>,
    /// Renormalized index, used as given instead of `rho(u)`.
    #[arg(long)]
    pub r: Option<f64>,
    #[arg(long)]
    pub x: u64,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Xi,
    Eta,
}

#[derive(Debug, Args, Serialize)]
pub struct CltArgs {
    #[arg(long, value_enum)]
    pub kind: Kind,
    #[arg(long)]
    pub u: f64,
    #[arg(long)]
    pub x: u64,
    /// Number of samples.
    #[arg(long, default_value_t = 100_000)]
    pub n: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct ConsistencyArgs {
    #[arg(long)]
    pub u: f64,
    #[arg(long)]
    pub x0: u64,
    /// Horizons, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "10,20,30")]
    pub n_list: Vec<usize>,
}

#[derive(Debug, Args, Serialize)]
pub struct FisherArgs {
    #[arg(long)]
    pub u: f64,
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub lambda0: f64,
    /// Number of simulated paths.
    #[arg(long, default_value_t = 100_000)]
    pub m: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct CompareArgs {
    /// Values of `u`, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    pub u: Vec<f64>,
}

/// Parses `argv` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match execute(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    let text = match thread_pool()? {
        Some(pool) => pool.install(|| commands::render(cli))?,
        None => commands::render(cli)?,
    };
    match &cli.output {
        Some(file) => std::fs::write(file, text)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
        }
    }
    Ok(())
}

fn thread_pool() -> Result<Option<rayon::ThreadPool>, CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(None);
    };
    let threads = raw
        .trim()
        .parse::<usize>()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| {
            CliError::Usage(format!(
                "{THREADS_ENV} must be a positive integer, got {raw:?}"
            ))
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map(Some)
        .map_err(|e| CliError::Usage(format!("cannot start {threads} threads: {e}")))
}
