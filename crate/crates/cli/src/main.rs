//! `capkaya`: ingest sector data, fit the capital-extended Kaya model and project
//! emissions scenarios.

mod commands;
mod config;
mod failure;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands::Context;
use crate::config::{Overrides, RunConfig};

#[derive(Parser, Debug)]
#[command(name = "capkaya", version, about = "Capital-extended Kaya identity toolkit")]
struct Cli {
    /// Run configuration file.
    #[arg(long, global = true, default_value = "capkaya.toml")]
    config: PathBuf,

    #[arg(long, global = true)]
    reference_year: Option<i32>,

    /// Integration step in years.
    #[arg(long, global = true)]
    step: Option<f64>,

    #[arg(long, global = true)]
    baseline_year: Option<i32>,

    /// Baseline total emissions, MtCO2/yr.
    #[arg(long, global = true)]
    baseline_emissions: Option<f64>,

    /// Seed for the optimizer restarts.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Fit beta on raw consumption emissions instead of intensity.
    #[arg(long, global = true)]
    beta_on_emissions: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load sector and macro CSVs into a validated dataset bundle.
    Ingest,
    /// Calibrate the model against the dataset bundle.
    Fit,
    /// Project scenarios to CSV. PLANS are bundled names or definition files.
    Project { plans: Vec<String> },
    /// Print the fitted parameters, scenario table and endpoints.
    Report { plans: Vec<String> },
}

fn run(cli: Cli) -> Result<(), failure::Failure> {
    let overrides = Overrides {
        reference_year: cli.reference_year,
        step: cli.step,
        baseline_year: cli.baseline_year,
        baseline_emissions: cli.baseline_emissions,
        seed: cli.seed,
        beta_on_emissions: cli.beta_on_emissions,
    };
    let config = RunConfig::load(&cli.config, &overrides)?;
    let root = cli
        .config
        .parent()
        .map(|p| p.to_path_buf())
        .unwrap_or_default();
    let ctx = Context { config, root };
    match cli.command {
        Command::Ingest => commands::ingest(&ctx),
        Command::Fit => commands::fit(&ctx),
        Command::Project { plans } => commands::project_cmd(&ctx, &plans),
        Command::Report { plans } => commands::report_cmd(&ctx, &plans),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("capkaya: {e}");
            ExitCode::from(e.code() as u8)
        }
    }
}
