//! Command-line front end for Bayesian quantile regression on bounded
//! responses with zero/one inflation: fit models declared in a TOML
//! configuration, simulate benchmark scenarios, predict at new data,
//! summarize convergence, and run replicate studies.

mod artifacts;
mod commands;
mod config;
mod data;
mod error;

use clap::{Parser, Subcommand};
use commands::diagnose::{cmd_diagnose, DiagnoseArgs};
use commands::fit::{cmd_fit, FitArgs};
use commands::predict::{cmd_predict, PredictArgs};
use commands::simulate::{cmd_simulate, SimulateArgs};
use commands::study::{cmd_replicate_study, StudyArgs};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "inflaquant",
    version,
    about = "Bayesian quantile regression for responses in [0, 1] with boundary inflation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the posterior for each configured quantile level.
    Fit(FitArgs),
    /// Generate a synthetic dataset with known truth.
    Simulate(SimulateArgs),
    /// Evaluate a stored fit at new covariate values.
    Predict(PredictArgs),
    /// Convergence and mixing summaries for a stored fit.
    Diagnose(DiagnoseArgs),
    /// Simulate, fit, and score a scenario across many replicates.
    ReplicateStudy(StudyArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Diagnose(args) => cmd_diagnose(args),
        Command::ReplicateStudy(args) => cmd_replicate_study(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
