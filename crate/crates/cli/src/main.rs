//! `zonesep` command-line driver. Exit codes: 0 success, 1 I/O, 2 invalid
//! input or parameters, 3 solver failure.

mod config;
mod run;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use zonesep::NumericalFlux;

use config::{parse_times, Format, Overrides, Scenario, ScenarioConfig};
use run::CliError;

#[derive(Parser)]
#[command(
    name = "zonesep",
    version,
    about = "Exact wave-interaction solutions for two-component zone electrophoresis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Scenario file (TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Comma-separated output times
    #[arg(long, global = true)]
    times: Option<String>,

    /// Samples per analytic profile
    #[arg(long, global = true)]
    samples: Option<usize>,

    /// Finite-volume cells (coarsest grid)
    #[arg(long, global = true)]
    cells: Option<usize>,

    /// Finite-volume CFL number
    #[arg(long, global = true)]
    cfl: Option<f64>,

    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// Finite-volume interface flux: hll | rusanov
    #[arg(long, global = true, value_parser = parse_flux)]
    flux: Option<NumericalFlux>,

    /// Number of finite-volume grids, each twice as fine as the last
    #[arg(long, global = true)]
    refine: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Event table and zone lifetimes
    Timeline,
    /// Exact profiles (CSV or JSON, plus SVG) per output time
    Profile,
    /// Exact against finite-volume profiles, with L1 errors and shock offsets
    Compare,
    /// Level-line march for piecewise-constant data
    General,
}

fn parse_flux(s: &str) -> Result<NumericalFlux, String> {
    match s {
        "hll" => Ok(NumericalFlux::Hll),
        "rusanov" => Ok(NumericalFlux::Rusanov),
        _ => Err(format!("unknown flux '{s}' (hll | rusanov)")),
    }
}

fn default_times(cmd: Command) -> Vec<f64> {
    match cmd {
        Command::Timeline => vec![],
        Command::Profile => vec![0.01, 0.0125, 0.036, 2.0 / 45.0, 0.25],
        Command::Compare => vec![0.167, 0.28],
        Command::General => vec![0.018],
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let cfg = match &cli.config {
        Some(path) => {
            ScenarioConfig::load(path).map_err(|e| CliError::Validation(format!("{e:#}")))?
        }
        None => ScenarioConfig::default(),
    };
    let times = cli
        .times
        .as_deref()
        .map(parse_times)
        .transpose()
        .map_err(CliError::Validation)?;
    let overrides = Overrides {
        out: cli.out,
        times,
        samples: cli.samples,
        cells: cli.cells,
        cfl: cli.cfl,
        format: cli.format,
        flux: cli.flux,
        refine: cli.refine,
    };
    let scenario = Scenario::resolve(cfg, overrides, &default_times(cli.command))
        .map_err(CliError::Validation)?;
    match cli.command {
        Command::Timeline => run::cmd_timeline(&scenario),
        Command::Profile => run::cmd_profile(&scenario),
        Command::Compare => run::cmd_compare(&scenario),
        Command::General => run::cmd_general(&scenario),
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
