//! `clickstat`: simulate, calibrate and reconstruct click-detector data.

mod analysis;
mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::config::Settings;
use crate::error::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "clickstat",
    version,
    about = "Photon-number statistics from multiplexed click detectors"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate coherent light on a detector; one shot file per mean photon number.
    Simulate {
        #[command(flatten)]
        settings: Settings,
    },
    /// Fit the response function and check bin uniformity and cross-talk.
    Tomography {
        #[command(flatten)]
        settings: Settings,
        /// Shot files of the calibration sweep.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Mandel and binomial parameters of shot files, reports, or closed forms.
    Qparams {
        #[command(flatten)]
        settings: Settings,
        /// Closed-form Q parameters over the --nbar sweep.
        #[arg(long)]
        analytic: bool,
        /// Shot files, or reports holding reconstructions.
        inputs: Vec<PathBuf>,
    },
    /// Reconstruct photon statistics from shot files.
    Invert {
        #[command(flatten)]
        settings: Settings,
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
    },
    /// Remove losses from the reconstructions in a report.
    Deconvolve {
        #[command(flatten)]
        settings: Settings,
        /// Report written by `invert` or `pipeline`.
        report: PathBuf,
    },
    /// Simulate, calibrate, reconstruct and deconvolve end to end.
    Pipeline {
        #[command(flatten)]
        settings: Settings,
    },
}

impl Command {
    fn settings(&self) -> &Settings {
        match self {
            Command::Simulate { settings }
            | Command::Tomography { settings, .. }
            | Command::Qparams { settings, .. }
            | Command::Invert { settings, .. }
            | Command::Deconvolve { settings, .. }
            | Command::Pipeline { settings } => settings,
        }
    }
}

fn execute(command: Command) -> CliResult<()> {
    let settings = command.settings().clone().load()?;
    settings.validate()?;
    if let Some(threads) = settings.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| CliError::Validation(format!("cannot set up {threads} threads: {e}")))?;
    }
    let s = &settings;
    match &command {
        Command::Simulate { .. } => commands::simulate::run(s),
        Command::Tomography { inputs, .. } => commands::tomography::run(s, inputs),
        Command::Qparams { analytic, inputs, .. } => commands::qparams::run(s, *analytic, inputs),
        Command::Invert { inputs, .. } => commands::invert::run(s, inputs),
        Command::Deconvolve { report, .. } => commands::deconvolve::run(s, report),
        Command::Pipeline { .. } => commands::pipeline::run(s),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
