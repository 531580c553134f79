use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use riemobs::cli::{
    exit_code_for_error, run_check, run_geodesic, run_report, run_simulate,
    JobConfig, Overrides,
};

/// Metric-based observer design toolkit: check detectability and geodesic
/// monotonicity conditions, simulate gradient-correction observers, and
/// certify distance contraction.
#[derive(Parser)]
#[command(name = "riemobs", version, about)]
struct Cli {
    /// Job configuration file (JSON). Flags below override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Sampling seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory override.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Sample-count override.
    #[arg(long, global = true)]
    samples: Option<usize>,
    /// Residual-tolerance override.
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run condition checks and write report.json.
    Check {
        /// Catalog benchmark name (alternative to --config).
        #[arg(long)]
        benchmark: Option<String>,
        /// Metric name within the benchmark.
        #[arg(long)]
        metric: Option<String>,
        /// Condition to check (repeatable): a2, a3-nullity, a3-direct,
        /// submersion.
        #[arg(long = "condition")]
        conditions: Vec<String>,
    },
    /// Simulate the observer and write run.csv plus summary.json.
    Simulate {
        #[arg(long)]
        benchmark: Option<String>,
        #[arg(long)]
        metric: Option<String>,
    },
    /// Solve or integrate a geodesic and write geodesic.csv.
    Geodesic {
        #[arg(long)]
        benchmark: Option<String>,
        #[arg(long)]
        metric: Option<String>,
    },
    /// Aggregate artifacts in the output directory into a table and
    /// dist_vs_t.dat.
    Report,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut cfg = match &cli.config {
        Some(path) => match JobConfig::load(path) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("error: {e}");
                return ExitCode::from(3);
            }
        },
        None => JobConfig::default(),
    };
    let mut ov = Overrides {
        seed: cli.seed,
        out: cli.out.clone(),
        samples: cli.samples,
        tol: cli.tol,
        ..Default::default()
    };
    let result = match &cli.cmd {
        Cmd::Check {
            benchmark,
            metric,
            conditions,
        } => {
            ov.benchmark = benchmark.clone();
            ov.metric = metric.clone();
            ov.conditions = conditions.clone();
            cfg.apply(&ov);
            run_check(&cfg)
        }
        Cmd::Simulate { benchmark, metric } => {
            ov.benchmark = benchmark.clone();
            ov.metric = metric.clone();
            cfg.apply(&ov);
            run_simulate(&cfg)
        }
        Cmd::Geodesic { benchmark, metric } => {
            ov.benchmark = benchmark.clone();
            ov.metric = metric.clone();
            cfg.apply(&ov);
            run_geodesic(&cfg)
        }
        Cmd::Report => {
            cfg.apply(&ov);
            run_report(&cfg)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code_for_error(&e) as u8)
        }
    }
}
