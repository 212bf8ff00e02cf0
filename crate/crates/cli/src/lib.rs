//! Command-line driver: configuration parsing and the `simulate`,
//! `benchmark` and `validate` subcommands.

pub mod commands;
pub mod config;

use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use commands::Outcome;
pub use config::{parse_config, ConfigError, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("cannot read config {}: {source}", path.display())]
    ConfigFile { path: PathBuf, source: std::io::Error },
    #[error("cannot write {}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Runtime(#[from] maxstable::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::ConfigFile { .. } => EXIT_CONFIG,
            CliError::Io { .. } | CliError::Runtime(_) => EXIT_RUNTIME,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "maxstable", version, about = "Exact simulation of max-stable random vectors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate replications and write them as CSV.
    Simulate(RunArgs),
    /// Compare engine costs and the N0 distribution of both site orderings.
    Benchmark {
        #[command(flatten)]
        run: RunArgs,
        /// Skip the spectral-measure engine.
        #[arg(long)]
        skip_spectral: bool,
    },
    /// Run the statistical conformance suite.
    Validate(RunArgs),
}

#[derive(Debug, Args)]
pub struct RunArgs {
    /// JSON configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Master seed (overrides the config).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of replications (overrides the config).
    #[arg(long)]
    pub reps: Option<usize>,
    /// Worker threads (overrides the config).
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output path (overrides the config).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

impl RunArgs {
    /// Reads the config file and applies command-line overrides.
    pub fn load(&self) -> Result<RunConfig, CliError> {
        let text = fs::read_to_string(&self.config).map_err(|source| CliError::ConfigFile {
            path: self.config.clone(),
            source,
        })?;
        let mut config = parse_config(&text)?;
        let mut errors = Vec::new();
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        match self.reps {
            Some(0) => errors.push("--reps: must be at least 1".to_string()),
            Some(r) => config.reps = r,
            None => {}
        }
        match self.threads {
            Some(0) => errors.push("--threads: must be at least 1".to_string()),
            Some(t) => config.threads = t,
            None => {}
        }
        if let Some(out) = &self.out {
            config.output = Some(out.clone());
        }
        if errors.is_empty() {
            Ok(config)
        } else {
            Err(ConfigError::Invalid(errors).into())
        }
    }
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::Simulate(args) => commands::cmd_simulate(&args.load()?),
        Command::Benchmark { run, skip_spectral } => commands::cmd_benchmark(&run.load()?, *skip_spectral),
        Command::Validate(args) => commands::cmd_validate(&args.load()?),
    }
}

/// Exit status for a finished run.
pub fn exit_code(result: &Result<Outcome, CliError>) -> i32 {
    match result {
        Ok(Outcome::Ok) => EXIT_OK,
        Ok(Outcome::ChecksFailed) => EXIT_CHECK_FAILED,
        Err(e) => e.exit_code(),
    }
}
