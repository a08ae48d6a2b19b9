//! Command-line front end.
//!
//! Exit codes: 0 success, 1 configuration or input error, 2 runtime error,
//! 64 usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Parser, Subcommand};

use crate::experiment::{emit_scatter, run_error_sweep, run_single, write_sweep_summary, ExperimentError, Inputs};
use crate::master_io::config::{validate, SimulationConfig};
use crate::master_io::report::{with_suffix, write_report};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Debug, Parser)]
#[command(
    name = "roomsim",
    version,
    about = "Occupancy-forecast error analysis for HVAC control"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Overrides {
    /// Override the config's rng_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for sweep replicates.
    #[arg(long)]
    workers: Option<usize>,
    /// Directory for output files (the config's output file name is kept).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and check a config without running anything.
    Validate { config: PathBuf },
    /// Run one simulation at the configured occupancy error.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        overrides: Overrides,
    },
    /// Sweep occupancy error levels over replicate forecasts.
    Sweep {
        config: PathBuf,
        /// Comma-separated error levels in percent.
        #[arg(long, value_delimiter = ',', default_value = "5,10,15,20")]
        errors: Vec<f64>,
        /// Replicates per day and level (defaults to the config's value).
        #[arg(long)]
        replicates: Option<u32>,
        #[command(flatten)]
        overrides: Overrides,
    },
}

enum Failure {
    Config(String),
    Runtime(String),
}

fn load_config(path: &Path, overrides: Option<&Overrides>) -> Result<SimulationConfig, Failure> {
    let mut config =
        SimulationConfig::from_file(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    config.resolve_paths(&base);
    if let Some(o) = overrides {
        if let Some(seed) = o.seed {
            config.rng_seed = seed;
        }
        if let Some(workers) = o.workers {
            config.workers = workers;
        }
        if let Some(dir) = &o.out {
            let name = config
                .files
                .output
                .file_name()
                .map(PathBuf::from)
                .unwrap_or_else(|| "output".into());
            config.files.output = dir.join(name);
        }
        validate(&config).map_err(|e| Failure::Config(e.to_string()))?;
    }
    Ok(config)
}

fn ensure_output_dir(config: &SimulationConfig) -> Result<(), Failure> {
    match config.files.output.parent() {
        Some(dir) if !dir.as_os_str().is_empty() => {
            std::fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))
        }
        _ => Ok(()),
    }
}

fn load_inputs(config: &SimulationConfig) -> Result<Inputs, Failure> {
    Inputs::load(config).map_err(|e| Failure::Config(e.to_string()))
}

fn runtime(e: impl ToString) -> Failure {
    Failure::Runtime(e.to_string())
}

fn experiment_failure(e: ExperimentError) -> Failure {
    match e {
        ExperimentError::Series(_) | ExperimentError::NoDays | ExperimentError::InvalidLevel(_) => {
            Failure::Config(e.to_string())
        }
        _ => runtime(e),
    }
}

fn execute(command: Command) -> Result<(), Failure> {
    match command {
        Command::Validate { config } => {
            let c = load_config(&config, None)?;
            eprintln!(
                "{}: ok ({} rooms, {} to {}, control {:?})",
                config.display(),
                c.rooms,
                c.start,
                c.stop,
                c.control
            );
            Ok(())
        }
        Command::Simulate { config, overrides } => {
            let c = load_config(&config, Some(&overrides))?;
            let inputs = load_inputs(&c)?;
            let run = run_single(&inputs).map_err(experiment_failure)?;
            ensure_output_dir(&c)?;
            write_report(&run.result, &run.report, &c.files.output).map_err(runtime)?;
            eprintln!(
                "energy {:.3} kWh, mean discomfort {:.2}%",
                run.report.energy_kwh,
                run.report.mean_discomfort_percent()
            );
            Ok(())
        }
        Command::Sweep {
            config,
            errors,
            replicates,
            overrides,
        } => {
            let c = load_config(&config, Some(&overrides))?;
            let replicates = replicates.unwrap_or(c.replicates);
            if replicates == 0 {
                return Err(Failure::Config("--replicates must be >= 1".into()));
            }
            let inputs = load_inputs(&c)?;
            let report = run_error_sweep(&inputs, &errors, replicates).map_err(experiment_failure)?;
            ensure_output_dir(&c)?;
            emit_scatter(&report, &with_suffix(&c.files.output, ".scatter.csv")).map_err(runtime)?;
            write_sweep_summary(&report, &with_suffix(&c.files.output, ".summary.json")).map_err(runtime)?;
            for (level, robust) in report.robust_by_level() {
                eprintln!("error {level}%: robust {robust:.1}%");
            }
            Ok(())
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => EXIT_USAGE,
                _ => EXIT_USAGE,
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            EXIT_CONFIG
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            EXIT_RUNTIME
        }
    }
}
