use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use mggpo::error::{Error, Result};
use mggpo_bench::analysis::{compare_dirs, convergence_csv, front_csv, metrics_json, Metric};
use mggpo_bench::config::load_config;
use mggpo_bench::experiment::run_experiment;

#[derive(Parser)]
#[command(
    name = "mggpo-bench",
    version,
    about = "Benchmark runner for multi-objective optimizers on the ZDT suite"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every repeat of an experiment described by a JSON config file.
    Run {
        /// Path to the experiment configuration.
        #[arg(long)]
        config: PathBuf,
        /// Override the number of repeats.
        #[arg(long)]
        repeats: Option<usize>,
        /// Override the base seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory (defaults to the config's out_dir).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score a stored front CSV against a problem's analytic front.
    Metrics {
        /// CSV file with an f1,f2 header.
        #[arg(long)]
        front: PathBuf,
        /// Problem identifier (zdt1, zdt2, zdt3, zdt6).
        #[arg(long)]
        problem: String,
        /// Hypervolume reference point, written as "f1,f2".
        #[arg(long = "ref-point", default_value = "1,1")]
        ref_point: String,
        /// Resolution of the analytic reference front.
        #[arg(long, default_value_t = 1000)]
        resolution: usize,
    },
    /// Compare two experiment directories with the rank-sum test.
    Compare {
        /// First experiment directory (side A).
        #[arg(long)]
        a: PathBuf,
        /// Second experiment directory (side B).
        #[arg(long)]
        b: PathBuf,
        /// Metric to compare: igd or hv.
        #[arg(long)]
        metric: String,
        /// Significance level.
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Emit a problem's analytic front as CSV.
    Front {
        /// Problem identifier (zdt1, zdt2, zdt3, zdt6).
        #[arg(long)]
        problem: String,
        /// Number of points along the front.
        #[arg(long, default_value_t = 1000)]
        resolution: usize,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-generation metric statistics across an experiment's runs.
    Convergence {
        /// Experiment directory.
        #[arg(long = "in")]
        input: PathBuf,
        /// Metric to tabulate: igd or hv.
        #[arg(long)]
        metric: String,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failures before any computation starts (bad flags or config files) exit
/// with 2; failures during execution exit with 1.
enum Failure {
    Config(Error),
    Runtime(Error),
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn parse_ref_point(text: &str) -> Result<[f64; 2]> {
    let parts: Vec<&str> = text.split(',').collect();
    let parsed: Option<Vec<f64>> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().ok().filter(|v| v.is_finite()))
        .collect();
    match parsed.as_deref() {
        Some([f1, f2]) => Ok([*f1, *f2]),
        _ => Err(Error::InvalidParameter {
            name: "ref-point",
            message: format!("expected two comma-separated numbers, got \"{text}\""),
        }),
    }
}

fn execute(command: Command) -> std::result::Result<(), Failure> {
    match command {
        Command::Run {
            config,
            repeats,
            seed,
            out,
        } => {
            let mut experiment = load_config(&config).map_err(Failure::Config)?;
            if let Some(r) = repeats {
                experiment.repeats = r;
            }
            if let Some(s) = seed {
                experiment.base_seed = s;
            }
            experiment.validate().map_err(Failure::Config)?;
            let out_dir = out
                .or_else(|| experiment.out_dir.clone())
                .ok_or_else(|| {
                    Failure::Config(Error::InvalidParameter {
                        name: "out_dir",
                        message: "no output directory: set out_dir in the config or pass --out"
                            .to_string(),
                    })
                })?;
            eprintln!(
                "running {} x {} on {}_{} (budget {}, seeds {}..{})",
                experiment.repeats,
                experiment.algo.as_str(),
                experiment.problem.to_ascii_lowercase(),
                experiment.dimension,
                experiment.budget,
                experiment.base_seed,
                experiment.base_seed + experiment.repeats as u64 - 1
            );
            let started = Instant::now();
            run_experiment(&experiment, &out_dir, &mut |repeat, run_id, last| {
                eprintln!(
                    "  [{}/{}] {run_id}: igd {:.6}, hv {:.6} ({:.1}s elapsed)",
                    repeat + 1,
                    experiment.repeats,
                    last.igd,
                    last.hv,
                    started.elapsed().as_secs_f64()
                );
            })
            .map_err(Failure::Runtime)?;
            eprintln!("wrote {}", out_dir.display());
            Ok(())
        }
        Command::Metrics {
            front,
            problem,
            ref_point,
            resolution,
        } => {
            let ref_point = parse_ref_point(&ref_point).map_err(Failure::Config)?;
            let json =
                metrics_json(&front, &problem, ref_point, resolution).map_err(Failure::Runtime)?;
            println!("{json}");
            Ok(())
        }
        Command::Compare {
            a,
            b,
            metric,
            alpha,
            out,
        } => {
            let metric = Metric::parse(&metric).map_err(Failure::Config)?;
            if !(alpha > 0.0 && alpha < 1.0) {
                return Err(Failure::Config(Error::InvalidParameter {
                    name: "alpha",
                    message: format!("significance level must lie in (0, 1), got {alpha}"),
                }));
            }
            let csv = compare_dirs(&a, &b, metric, alpha).map_err(Failure::Runtime)?;
            emit(&csv, out.as_deref()).map_err(Failure::Runtime)
        }
        Command::Front {
            problem,
            resolution,
            out,
        } => {
            let csv = front_csv(&problem, resolution).map_err(Failure::Config)?;
            emit(&csv, out.as_deref()).map_err(Failure::Runtime)
        }
        Command::Convergence { input, metric, out } => {
            let metric = Metric::parse(&metric).map_err(Failure::Config)?;
            let csv = convergence_csv(&input, metric).map_err(Failure::Runtime)?;
            emit(&csv, out.as_deref()).map_err(Failure::Runtime)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
