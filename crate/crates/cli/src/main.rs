use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use stableopt_core::harness::{build_problem, emit_outputs, run_experiment, trace_run, ExperimentConfig, Profile};
use stableopt_core::selfcheck::run_selfcheck;

/// Environment variable that overrides the worker thread count.
const THREADS_ENV: &str = "STABLEOPT_THREADS";

#[derive(Parser)]
#[command(
    name = "stableopt",
    version,
    about = "Adversarially robust GP optimization experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured algorithm over all repetitions.
    Run {
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out_dir: PathBuf,
        /// Override grid size and repetitions: `ci` (50×50, R=20) or `full` (100×100, R=100).
        #[arg(long)]
        profile: Option<Profile>,
    },
    /// Single-repetition run writing per-round posterior tables.
    Trace {
        config: PathBuf,
        #[arg(long, default_value = "trace")]
        out_dir: PathBuf,
        /// Exit nonzero unless the final candidate is the robust optimum.
        #[arg(long)]
        expect_optimum: bool,
    },
    /// Write the ground-truth robust table of the configured objective.
    Oracle {
        config: PathBuf,
        #[arg(long, default_value = "robust_table.csv")]
        out: PathBuf,
    },
    /// Run the internal invariant checks.
    Selfcheck,
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var(THREADS_ENV) {
        let n: usize = v
            .parse()
            .with_context(|| format!("{THREADS_ENV}={v} is not a thread count"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            out_dir,
            profile,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(p) = profile {
                cfg.apply_profile(p);
            }
            let start = std::time::Instant::now();
            let results = run_experiment(&cfg)?;
            let files = emit_outputs(&results, &out_dir)?;
            for row in results.summary().iter().filter(|r| r.round == cfg.rounds) {
                println!(
                    "{:<18} final mean {:.4}  median {:.4}",
                    row.algorithm.name(),
                    row.mean,
                    row.median
                );
            }
            for f in files {
                println!("wrote {}", f.display());
            }
            println!("elapsed {:.1}s", start.elapsed().as_secs_f64());
            if !results.failures.is_empty() {
                bail!("{} repetition(s) failed", results.failures.len());
            }
        }
        Command::Trace {
            config,
            out_dir,
            expect_optimum,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let summary = trace_run(&cfg, &out_dir)?;
            println!(
                "{} rounds written to {}; final candidate {}, robust optimum {}",
                summary.candidates.len(),
                out_dir.display(),
                summary.final_candidate(),
                summary.robust_optimum
            );
            if expect_optimum && !summary.reached_optimum() {
                bail!("final candidate is not the robust optimum");
            }
        }
        Command::Oracle { config, out } => {
            let cfg = ExperimentConfig::load(&config)?;
            let problem = build_problem(&cfg)?;
            problem.truth.write_csv(problem.pset.domain(), &out)?;
            let (opt, value) = problem.truth.robust_optimum();
            println!("robust optimum index {opt} value {value}; wrote {}", out.display());
        }
        Command::Selfcheck => {
            let mut failed = 0;
            for c in run_selfcheck() {
                println!(
                    "[{}] {} ({:.2}s): {}",
                    if c.passed { "PASS" } else { "FAIL" },
                    c.name,
                    c.seconds,
                    c.detail
                );
                failed += usize::from(!c.passed);
            }
            if failed > 0 {
                bail!("{failed} check(s) failed");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match configure_threads().and_then(|()| execute(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
