//! Command-line front end: `simulate` runs a seeded SNR sweep and writes
//! CSV/SVG results, `selftest` runs the built-in invariant checks.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};

use beamtrain::config::{load_config, ConfigOverrides};
use beamtrain::error::{Error, Result};
use beamtrain::report::{csv_string, emit_csv, emit_plot};
use beamtrain::selftest::run_selftest;
use beamtrain::sweep::run_sweep;
use beamtrain::training::NormalizationMode;
use beamtrain::transceiver::SignalMode;

#[derive(Parser)]
#[command(
    name = "beamtrain",
    version,
    about = "Link-level Monte Carlo simulator for sub-connected hybrid mmWave beam training"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Run an SNR sweep comparing the energy-weighted estimator against the
    /// 802.11ad max-energy baseline.
    Simulate {
        /// Config file with flat `key = value` lines; flags override it.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Lowest SNR grid point in dB.
        #[arg(long)]
        snr_min: Option<f64>,
        /// Highest SNR grid point in dB.
        #[arg(long)]
        snr_max: Option<f64>,
        /// Grid step in dB.
        #[arg(long)]
        snr_step: Option<f64>,
        /// Monte Carlo iterations per grid point.
        #[arg(long)]
        mc: Option<usize>,
        /// Master seed of the random stream tree.
        #[arg(long)]
        seed: Option<u64>,
        /// Training signal: gaussian | pilot.
        #[arg(long)]
        mode: Option<String>,
        /// AWV normalization: raw | unit-norm | unit-modulus.
        #[arg(long)]
        norm: Option<String>,
        /// CSV output path; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// SVG chart output path.
        #[arg(long)]
        plot: Option<PathBuf>,
        /// Worker thread count; defaults to all cores.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Run the built-in invariant checks.
    Selftest,
}

fn main() -> ExitCode {
    let matches = match Cli::command().try_get_matches() {
        Ok(matches) => matches,
        Err(err) => {
            use clap::error::ErrorKind;
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            err.print().ok();
            return ExitCode::from(code);
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(cli) => cli,
        Err(err) => {
            err.print().ok();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Simulate {
            config,
            snr_min,
            snr_max,
            snr_step,
            mc,
            seed,
            mode,
            norm,
            out,
            plot,
            workers,
        } => {
            let overrides = ConfigOverrides {
                snr_min_db: snr_min,
                snr_max_db: snr_max,
                snr_step_db: snr_step,
                mc,
                seed,
                mode: mode.as_deref().map(SignalMode::from_str).transpose()?,
                norm: norm
                    .as_deref()
                    .map(NormalizationMode::from_str)
                    .transpose()?,
            };
            let sim_config = load_config(config.as_deref(), &overrides)?;
            let result = match workers {
                Some(count) => {
                    if count == 0 {
                        return Err(Error::Config("--workers must be at least 1".into()));
                    }
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(count)
                        .build()
                        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
                    pool.install(|| run_sweep(&sim_config))?
                }
                None => run_sweep(&sim_config)?,
            };
            match &out {
                Some(path) => {
                    emit_csv(&result, path)?;
                    eprintln!(
                        "wrote {} ({} SNR points x {} iterations, seed {})",
                        path.display(),
                        result.points.len(),
                        sim_config.mc_iterations,
                        result.seed
                    );
                }
                None => print!("{}", csv_string(&result)),
            }
            if let Some(path) = &plot {
                emit_plot(&result, path)?;
                eprintln!("wrote {}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Selftest => {
            let checks = run_selftest();
            let mut failures = 0;
            for check in &checks {
                let status = if check.passed { "PASS" } else { "FAIL" };
                println!("{status} {} ({})", check.name, check.detail);
                if !check.passed {
                    failures += 1;
                }
            }
            if failures == 0 {
                println!("selftest: {} checks passed", checks.len());
                Ok(ExitCode::SUCCESS)
            } else {
                println!("selftest: {failures} of {} checks failed", checks.len());
                Ok(ExitCode::from(2))
            }
        }
    }
}
