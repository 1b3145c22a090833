use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qrelax::runner::{execute, ExperimentConfig, SweepKind};
use qrelax::Error;

#[derive(Parser)]
#[command(name = "qrelax", version, about = "Quench relaxation sweeps for the Dicke model and NN/NNN spin chain")]
struct Cli {
    #[command(subcommand)]
    sweep: Sweep,
}

#[derive(Subcommand)]
enum Sweep {
    /// Gap and fluctuations per (lambda0, n0)
    Fig1(RunArgs),
    /// (xi, gap, fluct) collapse dataset
    Fig23(RunArgs),
    /// IPR xi versus delta_lambda
    Fig4(RunArgs),
    /// Level-spacing diagnostics per lambda
    Spacing(RunArgs),
    /// Truncation checks plus the invariant suite
    Check(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// Experiment config (TOML)
    config: PathBuf,
    /// Dicke j = 20, n_max = 250 instead of the config's model size
    #[arg(long)]
    paper_scale: bool,
    /// Override run.workers (0 = all cores)
    #[arg(long)]
    workers: Option<usize>,
    /// Override output.dir
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Sweep {
    fn split(self) -> (SweepKind, RunArgs) {
        match self {
            Sweep::Fig1(a) => (SweepKind::Fig1, a),
            Sweep::Fig23(a) => (SweepKind::Fig23, a),
            Sweep::Fig4(a) => (SweepKind::Fig4, a),
            Sweep::Spacing(a) => (SweepKind::Spacing, a),
            Sweep::Check(a) => (SweepKind::Check, a),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let (kind, args) = Cli::parse().sweep.split();
    let result = ExperimentConfig::load(&args.config).and_then(|mut cfg| {
        if args.paper_scale {
            cfg.paper_scale();
        }
        if let Some(w) = args.workers {
            cfg.run.workers = w;
        }
        if let Some(dir) = args.out {
            cfg.output.dir = dir;
        }
        execute(kind, &cfg)
    });
    match result {
        Ok(summary) => {
            println!(
                "{kind}: {} rows, {} diagonalizations, {:.2}s -> {}",
                summary.rows,
                summary.diagonalizations,
                summary.elapsed.as_secs_f64(),
                summary.csv.display()
            );
            if summary.check_passed == Some(false) {
                eprintln!("check failed; see {}", summary.csv.display());
                return ExitCode::from(3);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            match &e {
                Error::Config(problems) => {
                    eprintln!("invalid config:");
                    for p in problems {
                        eprintln!("  - {p}");
                    }
                }
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
