//! `smc`: JSON-configured front end for synthesis, simulation, epidemic
//! control, global analysis and parameter sweeps.
//!
//! Exit codes: `0` success, `1` usage or validation error, `2` the run
//! completed but concluded negatively (infeasible plant, failed certificate).

mod config;
mod epidemic;
mod global;
mod output;
mod probe;
mod simulate;
mod sweep;
mod synthesize;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "smc", version, about = "Sliding-mode control under two-interval gain constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check feasibility and build a controller for a linear plant.
    Synthesize(Common),
    /// Simulate a switched linear closed loop.
    Simulate(Common),
    /// Simulate an epidemic model under the lockdown law.
    Epidemic(Common),
    /// Global analysis of the two-dimensional SEIR reduction.
    AnalyzeGlobal(Common),
    /// Run a grid of epidemic simulations.
    Sweep(SweepArgs),
}

#[derive(Args, Clone)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Seed for every random choice; overrides a `seed` key in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Time-series format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Also sample random positive controllable 2-D plants and record
    /// whether each converges to its equilibrium.
    #[arg(long)]
    positive_2d_probe: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// How a command that ran to completion ended.
pub enum Outcome {
    Success,
    Negative(String),
}

/// Everything a command needs besides its parsed config.
pub struct Invocation {
    pub command: &'static str,
    pub config_file: PathBuf,
    pub raw: Vec<u8>,
    pub out: PathBuf,
    pub seed: Option<u64>,
    pub format: Format,
    pub positive_2d_probe: bool,
}

impl Invocation {
    fn load(command: &'static str, common: Common, positive_2d_probe: bool) -> anyhow::Result<Self> {
        let raw = std::fs::read(&common.config).map_err(|e| {
            anyhow::anyhow!("cannot read config {}: {e}", common.config.display())
        })?;
        Ok(Self {
            command,
            config_file: common.config,
            raw,
            out: common.out,
            seed: common.seed,
            format: common.format,
            positive_2d_probe,
        })
    }

    /// Command-line seed, else the config's, else zero.
    pub fn seed(&self, from_config: Option<u64>) -> u64 {
        self.seed.or(from_config).unwrap_or(0)
    }

    /// Resolves a path written in the config relative to the config's directory.
    pub fn resolve(&self, path: &std::path::Path) -> PathBuf {
        if path.is_absolute() {
            return path.to_path_buf();
        }
        match self.config_file.parent() {
            Some(dir) => dir.join(path),
            None => path.to_path_buf(),
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Synthesize(c) => synthesize::run(&Invocation::load("synthesize", c, false)?),
        Command::Simulate(c) => simulate::run(&Invocation::load("simulate", c, false)?),
        Command::Epidemic(c) => epidemic::run(&Invocation::load("epidemic", c, false)?),
        Command::AnalyzeGlobal(c) => global::run(&Invocation::load("analyze-global", c, false)?),
        Command::Sweep(s) => {
            sweep::run(&Invocation::load("sweep", s.common, s.positive_2d_probe)?)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // clap would use 2 for usage errors, which is reserved here.
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::Negative(msg)) => {
            eprintln!("negative result: {msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
