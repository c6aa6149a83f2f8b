//! Configuration-driven experiment runner for `lvspde`.
//!
//! Each subcommand reads a TOML experiment file, runs on a worker pool of
//! configurable size, and writes CSV or NDJSON reports plus `verdicts.csv`
//! from a single writer once the run is complete.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

pub use config::Experiment;
pub use error::CliError;
pub use output::Report;

use commands::Overrides;
use output::Provenance;

#[derive(Debug, Parser)]
#[command(
    name = "lvspde",
    version,
    about = "Stochastic Lotka-Volterra reaction-diffusion experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Heat kernel representations, invariants and increment scaling.
    KernelCheck,
    /// Sheet versus spectral stochastic integrals.
    NoiseCheck,
    /// One path, snapshots as NDJSON.
    Simulate,
    /// Ensemble means of log-mass and sup-norm moments.
    Ensemble,
    /// Space and time Hölder exponents.
    Holder,
    /// Decay rate of the expected log-mass.
    Extinction,
    /// Moment bounds and windowed stationarity.
    Invariant,
    /// Atom check of a one-point marginal.
    Density,
    /// Regularized log-mass functional along one path.
    Audit,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Flags {
    /// Experiment configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Overrides the master seed of the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Overrides the number of paths.
    #[arg(long, global = true)]
    pub paths: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, env = "LVSPDE_OUT_DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Omit the wall-clock runtime so repeated runs are byte-identical.
    #[arg(long, global = true)]
    pub reproducible: bool,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::KernelCheck => "kernel-check",
            Command::NoiseCheck => "noise-check",
            Command::Simulate => "simulate",
            Command::Ensemble => "ensemble",
            Command::Holder => "holder",
            Command::Extinction => "extinction",
            Command::Invariant => "invariant",
            Command::Density => "density",
            Command::Audit => "audit",
        }
    }
}

/// A finished run.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub dir: PathBuf,
    pub written: Vec<PathBuf>,
}

/// Loads the configuration, runs `command` and writes its reports.
pub fn execute(command: Command, flags: &Flags) -> Result<Outcome, CliError> {
    let path = flags
        .config
        .as_ref()
        .ok_or_else(|| CliError::Usage("--config PATH is required".into()))?;
    let exp = Experiment::load(path)?;
    let ov = Overrides {
        seed: flags.seed,
        paths: flags.paths,
    };
    if ov.paths == Some(0) {
        return Err(CliError::Usage("--paths must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(flags.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start {} threads: {e}", flags.threads)))?;
    let start = Instant::now();
    let report = pool.install(|| match command {
        Command::KernelCheck => commands::kernel_check(&exp),
        Command::NoiseCheck => commands::noise_check(&exp, ov),
        Command::Simulate => commands::simulate(&exp, ov),
        Command::Ensemble => commands::ensemble(&exp, ov),
        Command::Holder => commands::holder(&exp, ov),
        Command::Extinction => commands::extinction(&exp, ov),
        Command::Invariant => commands::invariant(&exp, ov),
        Command::Density => commands::density(&exp, ov),
        Command::Audit => commands::audit(&exp, ov),
    })?;
    let runtime = start.elapsed();

    let dir = match (&flags.out, &exp.raw.run.output_dir) {
        (Some(d), _) => d.clone(),
        (None, Some(d)) => exp.relative(d),
        (None, None) => PathBuf::from("output").join(&exp.raw.run.name),
    };
    let prov = Provenance {
        command: command.name().into(),
        config_hash: exp.hash.clone(),
        seed: report.seed,
        runtime: (!flags.reproducible).then_some(runtime),
    };
    let written = report.write(&dir, &prov)?;
    Ok(Outcome {
        report,
        dir,
        written,
    })
}
