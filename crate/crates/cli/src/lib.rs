//! Batch runner around `q2ma-core`: JSON configs in, CSV tables and JSON summaries out.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod tolerance;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::RunOptions;
pub use config::Config;
pub use error::CliError;
pub use output::Staged;

#[derive(Debug, Parser)]
#[command(name = "q2ma", version, about = "Quantum Metropolis walk and annealing experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, clap::Args)]
pub struct Common {
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory, created if missing.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Measurement sampling seed; overrides the config.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_enum)]
    pub mode: Option<config::ModeName>,
    /// Add a label of weight 1/2 that leaves the state in place, making the chain lazy.
    #[arg(long, global = true)]
    pub lazy_chain: bool,
    /// Permit five-qubit walk spaces.
    #[arg(long, global = true)]
    pub allow_large: bool,
    /// Sweep worker threads.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Transition matrix and spectral gap of the Metropolis chain.
    Chain,
    /// Walk operator phase gap, fixed point and eigenphases.
    Walk,
    /// Annealing ladder from infinite temperature to `beta`.
    Anneal,
    /// Gap inequality over a list of instances.
    Sweep,
    /// Finite-resolution leakage per eigenstate.
    Leakage,
}

/// Runs `command` and returns the staged files without writing them.
pub fn execute(command: Command, config: &Config, opts: &RunOptions) -> Result<Staged, CliError> {
    match command {
        Command::Chain => commands::chain(config, opts),
        Command::Walk => commands::walk(config, opts),
        Command::Anneal => commands::anneal(config, opts),
        Command::Sweep => commands::sweep(config, opts),
        Command::Leakage => commands::leakage(config, opts),
    }
}

pub fn run(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let tol = tolerance::from_env()?;
    let path = cli
        .common
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config is required".into()))?;
    let config = Config::load(path)?;
    let opts = RunOptions {
        seed: cli.common.seed,
        mode: cli.common.mode,
        lazy_chain: cli.common.lazy_chain,
        allow_large: cli.common.allow_large,
        jobs: cli.common.jobs,
        tol,
    };
    let staged = execute(cli.command, &config, &opts)?;
    staged.commit(&cli.common.out)
}
