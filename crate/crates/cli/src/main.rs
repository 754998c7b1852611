use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rcsim_cli::config::{ExperimentConfig, Overrides};
use rcsim_cli::energy::{cmd_energy, EnergyModel};
use rcsim_cli::pipeline::{cmd_oracle_check, cmd_plan, cmd_run};
use rcsim_cli::reproduce::{reproduce, Figure, ReproduceParams};
use rcsim_cli::scaling::cmd_scaling;
use rcsim_cli::{error_kind, exit_code};
use rcsim_core::{Precision, Result};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "rcsim", version, about = "Approximate tensor-network sampling of random quantum circuits")]
struct Cli {
    /// JSON experiment configuration; defaults apply to missing fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// f64 or f32.
    #[arg(long, global = true)]
    precision: Option<Precision>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write circuit, plan, samples, metrics and timings.
    Run,
    /// Plan the contraction and print its cost without executing it.
    Plan,
    /// Time the workload at several worker counts and fit time = a/w + b.
    Scaling {
        #[arg(long, value_delimiter = ',', default_value = "1,2,4")]
        worker_counts: Vec<usize>,
        /// Worker count to extrapolate the fit to.
        #[arg(long)]
        extrapolate: Option<f64>,
    },
    /// Energy from declared device power, device count and wall time.
    Energy {
        #[arg(long)]
        power_watts: f64,
        #[arg(long, default_value_t = 1)]
        devices: u64,
        #[arg(long)]
        seconds: f64,
    },
    /// Write a figure dataset as CSV.
    Reproduce {
        /// fidelity_vs_K, amplification_vs_k, scaling or pt_histogram.
        figure: String,
        #[arg(long, default_value_t = 20)]
        seeds: usize,
    },
    /// Compare exact contraction against the dense simulator.
    OracleCheck,
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    cfg.apply(&Overrides { seed: cli.seed, workers: cli.workers, out: cli.out.clone(), precision: cli.precision });
    match cli.command {
        Command::Run => print_json(&cmd_run(&cfg)?.report),
        Command::Plan => print_json(&cmd_plan(&cfg)?),
        Command::Scaling { worker_counts, extrapolate } => print_json(&cmd_scaling(&cfg, &worker_counts, extrapolate)?),
        Command::Energy { power_watts, devices, seconds } => print_json(&cmd_energy(EnergyModel {
            device_power_watts: power_watts,
            device_count: devices,
            wall_seconds: seconds,
        })?),
        Command::Reproduce { figure, seeds } => {
            let figure: Figure = figure.parse()?;
            let mut params = ReproduceParams { seeds, base_seed: cfg.seed, ..ReproduceParams::default() };
            params.scaling_config.execution.precision = cfg.execution.precision;
            let csv = reproduce(figure, &params)?.to_csv();
            std::fs::create_dir_all(&cfg.output.dir)?;
            let path = cfg.output.dir.join(format!("{}.csv", figure.name()));
            std::fs::write(&path, &csv)?;
            print!("{csv}");
            log::info!("wrote {}", path.display());
            Ok(())
        }
        Command::OracleCheck => {
            let report = cmd_oracle_check(&cfg)?;
            print_json(&report)?;
            if !report.passed {
                return Err(rcsim_core::Error::Input(format!(
                    "oracle mismatch: max relative error {:e} exceeds {:e}",
                    report.max_relative_error, report.tolerance
                )));
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let body = serde_json::json!({ "error": error_kind(&err), "message": err.to_string() });
            eprintln!("{body}");
            ExitCode::from(exit_code(&err) as u8)
        }
    }
}
