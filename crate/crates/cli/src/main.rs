//! `cascade`: Gaussian bound sweeps, region search, simulation runs and
//! verification suites for the cascade source coding network.
//!
//! Exit codes: 0 success, 2 usage error, 3 invalid input, 4 failed verification.

mod error;
mod gaussian_sweep;
mod grid;
mod output;
mod region;
mod simulate;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use cascade_core::presets::Preset;
use clap::{Parser, Subcommand, ValueHint};

use crate::error::{CliError, Result};
use crate::output::Sink;

#[derive(Parser)]
#[command(name = "cascade", version, about = "Rate-distortion tools for the cascade source coding network")]
struct Cli {
    /// Seed for every random choice; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for output files and the run manifest. Without it the main
    /// output goes to stdout and no manifest is written.
    #[arg(long, global = true, value_hint = ValueHint::DirPath)]
    out_dir: Option<PathBuf>,
    /// Named configuration: korner-marton, markov-copy, lossless-identical or n-sweep.
    #[arg(long, global = true)]
    preset: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Gaussian inner and outer distortions, or sum-rate bounds, over a grid.
    GaussianSweep(gaussian_sweep::Opts),
    /// Inner and outer frontier search on a finite-alphabet source.
    Region(region::Opts),
    /// Monte Carlo run of the random-coding scheme.
    Simulate(simulate::Opts),
    /// Run a named verification suite.
    Verify(verify::Opts),
}

/// Flags shared by every subcommand.
pub struct Global {
    pub seed: Option<u64>,
    pub preset: Option<Preset>,
    pub sink: Sink,
}

impl Global {
    pub fn reject_preset(&self, subcommand: &str) -> Result<()> {
        match self.preset {
            Some(p) => Err(CliError::Usage(format!("{subcommand} takes no preset, got {}", p.name()))),
            None => Ok(()),
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let preset = cli
        .preset
        .as_deref()
        .map(|s| s.parse::<Preset>().map_err(|e| CliError::Usage(e.to_string())))
        .transpose()?;
    let global = Global { seed: cli.seed, preset, sink: Sink::new(cli.out_dir)? };
    match cli.command {
        Command::GaussianSweep(opts) => gaussian_sweep::run(opts, global),
        Command::Region(opts) => region::run(opts, global),
        Command::Simulate(opts) => simulate::run(opts, global),
        Command::Verify(opts) => verify::run(opts, global),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
