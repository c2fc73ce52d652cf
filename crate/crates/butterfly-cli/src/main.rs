//! Command-line front end for the butterfly-network simulator.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;
mod error;
mod io;

use config::Overrides;
use error::CliError;

#[derive(Parser)]
#[command(
    name = "butterfly",
    about = "Simulate and verify relaying schemes on the two-way butterfly network"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by the experiment subcommands; every one overrides the
/// matching config-file key.
#[derive(Args, Debug)]
struct RunFlags {
    /// TOML configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Scheme: no_cache, cache, cache_partial, mimo, or mimo_no_side.
    #[arg(long)]
    scheme: Option<String>,
    /// Topology: single, mimo, or mimo_no_side (derived from the scheme
    /// when absent).
    #[arg(long)]
    topology: Option<String>,
    /// Power grid in dB as start:stop:step.
    #[arg(long)]
    pdb: Option<String>,
    /// Caching fraction for cache_partial.
    #[arg(long)]
    p: Option<f64>,
    /// Base channel seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Number of channel realizations.
    #[arg(long)]
    trials: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<String>,
    /// Residual-interference tolerance.
    #[arg(long)]
    tol_residual: Option<f64>,
    /// Relative rank-decision tolerance.
    #[arg(long)]
    tol_rank: Option<f64>,
}

impl RunFlags {
    fn split(self) -> (Option<PathBuf>, Overrides) {
        (
            self.config,
            Overrides {
                scheme: self.scheme,
                topology: self.topology,
                pdb: self.pdb,
                p: self.p,
                seed: self.seed,
                trials: self.trials,
                out: self.out,
                tol_residual: self.tol_residual,
                tol_rank: self.tol_rank,
            },
        )
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a scheme over the power grid and write rates, slopes,
    /// channels, and beamformers.
    Simulate {
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Run the verification battery: cancellation residuals, nullspace
    /// census, solver cross-check, genie bound, and relay power accounting.
    Verify {
        #[command(flatten)]
        flags: RunFlags,
        /// Check a serialized channel file for degeneracy instead.
        #[arg(long)]
        channels: Option<PathBuf>,
        /// Print the parameter-counting table instead.
        #[arg(long)]
        feasibility: bool,
    },
    /// Evaluate the genie-aided cut-set bound (preset cut, or [cut] from
    /// the config file) next to the configured scheme's measured slope.
    Bound {
        #[command(flatten)]
        flags: RunFlags,
    },
    /// Print the nulling parameter-counting table.
    Feasibility,
}

/// Verify defaults to a full-size battery when no trial count is given.
const VERIFY_DEFAULT_TRIALS: u64 = 1000;

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate { flags } => {
            let (path, over) = flags.split();
            let cfg = config::resolve(path.as_deref(), over)?;
            commands::cmd_simulate(&cfg)
        }
        Command::Verify {
            flags,
            channels,
            feasibility,
        } => {
            if feasibility {
                return commands::cmd_feasibility();
            }
            if let Some(file) = channels {
                return commands::cmd_verify_channels(&file);
            }
            let (path, over) = flags.split();
            let trials_flag = over.trials;
            let cfg = config::resolve(path.as_deref(), over)?;
            commands::cmd_verify(&cfg, trials_flag.unwrap_or(VERIFY_DEFAULT_TRIALS))
        }
        Command::Bound { flags } => {
            let (path, over) = flags.split();
            let cfg = config::resolve(path.as_deref(), over)?;
            commands::cmd_bound(&cfg)
        }
        Command::Feasibility => commands::cmd_feasibility(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
