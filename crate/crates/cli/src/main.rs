//! Batch runner for the radnet builders, audits and sweeps.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numeric or precision
//! failure, 4 training failure, 1 anything else (I/O).

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::FlagOverrides;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] radnet::Error),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Core(e) if e.is_configuration() => 2,
            CliError::Core(e) if e.is_numeric() => 3,
            CliError::Core(radnet::Error::Training(_)) => 4,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "radnet", version, about = "Deep tree nets for radial functions: builds, audits and rate sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML experiment configuration.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[arg(long, global = true)]
    seed: Option<u64>,

    #[arg(long = "precision-bits", global = true, value_name = "INT")]
    precision_bits: Option<u32>,

    /// Output directory.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// logistic, tanh-shifted, arctan-shifted or gompertz.
    #[arg(long, global = true, value_name = "NAME")]
    activation: Option<String>,

    /// Dotted configuration key, e.g. `build.n=16`. Repeatable.
    #[arg(long = "override", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build one radial approximant; writes net.json and report.json.
    Build,
    /// Approximation-rate sweep over n; writes rate_approx.csv with columns
    /// n,d,r,sup_error,params and a trailing fitted_slope row.
    RateApprox,
    /// Learning-rate sweep over m; writes rate_learn.csv with columns
    /// m,n,trials,median_excess_risk,stderr and a trailing fitted_slope row.
    RateLearn,
    /// Packing-family distance and Hölder audit; writes pack.csv with columns
    /// pair,hamming,distance,predicted,relative_error,pass.
    Pack,
    /// Activation assumptions, lower-bound curves and optional weight-bound
    /// check; writes audit.json and lower_bounds.csv with columns
    /// n,shallow,deep,lemma,n_star.
    Audit,
}

fn run(cli: Cli) -> Result<String, CliError> {
    let flags = FlagOverrides {
        seed: cli.seed,
        precision_bits: cli.precision_bits,
        out: cli.out,
        activation: cli.activation,
        overrides: cli.overrides,
    };
    let cfg = config::load(cli.config.as_deref(), &flags)?;
    match cli.command {
        Command::Build => commands::build(&cfg),
        Command::RateApprox => commands::rate_approx(&cfg),
        Command::RateLearn => commands::rate_learn(&cfg),
        Command::Pack => commands::pack(&cfg),
        Command::Audit => commands::audit(&cfg),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(summary) => {
            println!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("radnet: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
