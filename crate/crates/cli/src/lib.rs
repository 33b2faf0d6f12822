//! Experiment runner behind the `msalab` binary.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use error::CliError;
use output::{sha256_hex, RunDir, RunManifest, CONFIG_COPY};

#[derive(Debug, Parser)]
#[command(name = "msalab", version, about = "Desk-scale experiments on Poisson random Schrödinger operators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// JSON experiment configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config's `output`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Trials per scale (overrides the config).
    #[arg(long, global = true)]
    pub trials: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Sample Poisson configurations and check the tail bounds.
    Sample,
    /// Classify sampled boxes as good, jgood or bad.
    Goodbox,
    /// Run the multiscale Monte Carlo driver over the scales.
    Msa,
    /// Eigenfunction decay, SUDEC constants, multiplicities and moments.
    Measure,
    /// Empirical Wegner pass fractions.
    Wegner,
    /// Verify standard coverings over a range of scale ratios.
    CoveringCheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Sample => "sample",
            Command::Goodbox => "goodbox",
            Command::Msa => "msa",
            Command::Measure => "measure",
            Command::Wegner => "wegner",
            Command::CoveringCheck => "covering-check",
        }
    }
}

/// Thread count from MSALAB_THREADS, or every core when unset.
pub fn threads_from_env() -> Result<usize, CliError> {
    match std::env::var("MSALAB_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Validation(format!("MSALAB_THREADS must be a positive integer, got {v:?}"))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}

pub fn resolve_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(t) = cli.trials {
        cfg.trials = t;
    }
    if let Some(o) = &cli.out {
        cfg.output = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Runs one subcommand in `threads` worker threads and writes the manifest.
/// Returns the manifest and the exit code.
pub fn execute(command: Command, cfg: &ExperimentConfig, threads: usize) -> Result<(RunManifest, i32), CliError> {
    let out = cfg.output.clone().unwrap_or_else(|| PathBuf::from("msalab-out"));
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Solver(format!("thread pool: {e}")))?;
    let mut run = RunDir::create(&out)?;

    // the copy omits the output directory so reruns elsewhere hash the same
    let mut stored = cfg.clone();
    stored.output = None;
    let mut cfg_bytes = serde_json::to_vec_pretty(&stored).expect("serialisable");
    cfg_bytes.push(b'\n');
    let config_hash = sha256_hex(&cfg_bytes);
    run.write_bytes(CONFIG_COPY, &cfg_bytes)?;

    let outcome = pool.install(|| match command {
        Command::Sample => commands::sample(cfg, &mut run),
        Command::Goodbox => commands::goodbox(cfg, &mut run),
        Command::Msa => commands::msa(cfg, &mut run),
        Command::Measure => commands::measure(cfg, &mut run),
        Command::Wegner => commands::wegner(cfg, &mut run),
        Command::CoveringCheck => commands::covering_check(cfg, &mut run),
    });
    let (code, err) = match outcome {
        Ok(Ok(())) => (0, None),
        Ok(Err(msg)) => (3, Some(CliError::TargetsMissed(msg))),
        Err(e) => (e.exit_code(), Some(e)),
    };
    // partial results still get a manifest
    let manifest = run.finish(command.name(), config_hash, cfg.seed, cfg.trials, threads, code)?;
    match err {
        Some(e @ CliError::TargetsMissed(_)) => {
            log::warn!("{e}");
            Ok((manifest, code))
        }
        Some(e) => Err(e),
        None => Ok((manifest, code)),
    }
}

pub fn load_manifest(path: &Path) -> Result<RunManifest, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Validation(format!("{}: {e}", path.display())))
}
