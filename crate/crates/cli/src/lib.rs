//! Command-line front end: argument parsing, configuration and the subcommands.

pub mod commands;
pub mod config;
pub mod files;
pub mod overlay;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use config::PipelineConfig;

#[derive(Debug, Parser)]
#[command(name = "flatpart", version, about = "Fish alignment, part segmentation, augmentation, evaluation and heatmaps")]
pub struct Cli {
    /// Key-value configuration file; flags override its entries.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for per-file work.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate synthetic fish (and optionally disease patches).
    Synth(commands::synth::SynthArgs),
    /// Level each fish along its principal axis and crop it.
    Align(commands::align::AlignArgs),
    /// Label head, fins and body on aligned fish.
    Partseg(commands::partseg::PartsegArgs),
    /// Composite disease patches onto fish images.
    Augment(commands::augment::AugmentArgs),
    /// Score detections against ground truth.
    Eval(commands::eval::EvalArgs),
    /// Accumulate annotated boxes into canonical-frame heatmaps.
    Heatmap(commands::heatmap::HeatmapArgs),
    /// Print the effective configuration.
    Config(ConfigArgs),
}

#[derive(Debug, Args)]
pub struct ConfigArgs {
    #[arg(long)]
    pub seed: Option<u64>,
}

/// How a command ended when it did not fail outright.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Some files failed; the rest were processed.
    Partial,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, paths or configuration.
    Usage(anyhow::Error),
    Failed(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Failed(e)
    }
}

impl From<flatpart::Error> for CliError {
    fn from(e: flatpart::Error) -> Self {
        CliError::Failed(e.into())
    }
}

pub type CmdResult = Result<Outcome, CliError>;

pub fn usage(msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(anyhow::anyhow!("{msg}"))
}

fn load_config(cli: &Cli) -> Result<PipelineConfig, CliError> {
    let mut config = match &cli.config {
        Some(path) => PipelineConfig::load(path).map_err(CliError::Usage)?,
        None => PipelineConfig::default(),
    };
    if cli.workers.is_some() {
        config.workers = cli.workers;
    }
    Ok(config)
}

/// Applies flag overrides on top of the file values, then validates.
fn configured(config: &mut PipelineConfig, apply: impl FnOnce(&mut PipelineConfig)) -> Result<(), CliError> {
    apply(config);
    config.validate().map_err(CliError::Usage)
}

pub fn run(cli: Cli) -> CmdResult {
    let mut config = load_config(&cli)?;
    match &cli.command {
        Command::Synth(a) => {
            configured(&mut config, |c| a.apply(c))?;
            commands::synth::run(a, &config)
        }
        Command::Align(a) => {
            configured(&mut config, |c| a.apply(c))?;
            commands::align::run(a, &config)
        }
        Command::Partseg(a) => {
            configured(&mut config, |c| a.apply(c))?;
            commands::partseg::run(a, &config)
        }
        Command::Augment(a) => {
            configured(&mut config, |c| a.apply(c))?;
            commands::augment::run(a, &config)
        }
        Command::Eval(a) => {
            configured(&mut config, |c| a.apply(c))?;
            commands::eval::run(a, &config)
        }
        Command::Heatmap(a) => {
            configured(&mut config, |c| a.apply(c))?;
            commands::heatmap::run(a, &config)
        }
        Command::Config(a) => {
            configured(&mut config, |c| {
                if a.seed.is_some() {
                    c.seed = a.seed;
                }
            })?;
            print!("{}", config.to_text());
            Ok(Outcome::Success)
        }
    }
}

pub fn exit_code(result: &CmdResult) -> ExitCode {
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Partial) | Err(CliError::Failed(_)) => ExitCode::from(1),
        Err(CliError::Usage(_)) => ExitCode::from(2),
    }
}

/// Builds the bounded pool used for per-file work.
pub fn pool(config: &PipelineConfig) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(config.worker_count())
        .build()
        .map_err(|e| CliError::Failed(e.into()))
}
