//! Experiment runner for `settle-core`: reads a TOML document, runs one
//! command and writes CSV and JSON into an output directory.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::ExperimentConfig;
pub use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "settle",
    version,
    about = "Startup-time analysis of bang-bang clock recovery loops"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Markov-chain mean, spread and absorption CDF.
    Analyze(RunArgs),
    /// Monte Carlo escape statistics.
    Simulate(RunArgs),
    /// Eye diagram and crossing histogram of an RC channel.
    Eye(RunArgs),
    /// Baseline against treatment (step mismatch or training data).
    Compare(RunArgs),
    /// Transitions to absorb with confidence, per window size.
    Sweep(RunArgs),
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long, value_name = "PATH")]
    pub config: PathBuf,
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Overrides `seed` in the config.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the trial count in the config.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub quiet: bool,
}

impl Command {
    pub fn args(&self) -> &RunArgs {
        match self {
            Command::Analyze(a)
            | Command::Simulate(a)
            | Command::Eye(a)
            | Command::Compare(a)
            | Command::Sweep(a) => a,
        }
    }
}

/// Loads the config, applies overrides and runs the command. Returns the
/// files written.
pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let args = cli.command.args();
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    let overrides = Overrides {
        trials: args.trials,
    };
    let written = match cli.command {
        Command::Analyze(_) => commands::analyze::run(&cfg, &args.out)?,
        Command::Simulate(_) => commands::simulate::run(&cfg, &overrides, &args.out)?,
        Command::Eye(_) => commands::eye::run(&cfg, &args.out)?,
        Command::Compare(_) => commands::compare::run(&cfg, &overrides, &args.out)?,
        Command::Sweep(_) => commands::sweep::run(&cfg, &args.out)?,
    };
    if !args.quiet {
        for path in &written {
            println!("wrote {}", path.display());
        }
    }
    Ok(written)
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Overrides {
    pub trials: Option<u64>,
}
