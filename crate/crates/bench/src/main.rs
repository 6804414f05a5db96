use std::path::{Path, PathBuf};
use std::process::ExitCode;

use batched_nsga3::niche::Backend;
use batched_nsga3_bench::compare::write_compare;
use batched_nsga3_bench::summary::write_summaries;
use batched_nsga3_bench::{compare_backends, run_plan, summarize, BenchError, ExperimentPlan, Result};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "nsga3-bench", version, about = "Run and summarize NSGA-III experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment plan and write per-generation results.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Result CSV; defaults to the plan's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed count, or a comma-separated seed list.
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long, value_enum)]
        backend: Option<BackendArg>,
        /// Seconds per cell.
        #[arg(long)]
        time_limit: Option<f64>,
    },
    /// Per-configuration statistics of a result file.
    Summarize {
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Per-generation time of the oracle and batched backends.
    Compare {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seeds: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Batched,
    Oracle,
}

fn apply_seeds(plan: &mut ExperimentPlan, seeds: Option<&str>) -> Result<()> {
    let Some(s) = seeds else { return Ok(()) };
    let bad = |_| BenchError::Config(format!("invalid --seeds value {s:?}"));
    if s.contains(',') {
        let list = s.split(',').map(|v| v.trim().parse::<u64>().map_err(bad)).collect::<Result<Vec<_>>>()?;
        plan.seeds = Some(list);
    } else {
        plan.seeds = None;
        plan.repetitions = s.trim().parse().map_err(bad)?;
    }
    Ok(())
}

fn with_output(out: Option<&Path>, f: impl FnOnce(&mut dyn std::io::Write) -> Result<()>) -> Result<()> {
    match out {
        Some(p) => {
            let mut file = std::fs::File::create(p).map_err(|e| BenchError::io(p, e))?;
            f(&mut file)
        }
        None => f(&mut std::io::stdout().lock()),
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run {
            config,
            out,
            seeds,
            backend,
            time_limit,
        } => {
            let mut plan = ExperimentPlan::load(&config)?;
            apply_seeds(&mut plan, seeds.as_deref())?;
            if let Some(b) = backend {
                plan.backend = match b {
                    BackendArg::Batched => Backend::Batched,
                    BackendArg::Oracle => Backend::Oracle,
                };
            }
            if time_limit.is_some() {
                plan.time_limit = time_limit;
            }
            let out = out
                .or_else(|| plan.output.clone())
                .ok_or_else(|| BenchError::Config("no output path: pass --out or set `output`".into()))?;
            let report = run_plan(&plan, &out)?;
            eprintln!(
                "{} runs, {} rows, {} timed out, {} failed -> {}",
                report.runs,
                report.rows,
                report.timed_out.len(),
                report.failures.len(),
                report.output.display()
            );
            for f in &report.failures {
                eprintln!("failed {} seed {}: {}", f.fingerprint, f.seed, f.error);
            }
            if report.failures.is_empty() {
                Ok(())
            } else {
                Err(BenchError::Failed(report.failures.len()))
            }
        }
        Command::Summarize { input, out } => {
            let summaries = summarize(&input)?;
            with_output(out.as_deref(), |w| write_summaries(w, &summaries))
        }
        Command::Compare { config, out, seeds } => {
            let mut plan = ExperimentPlan::load(&config)?;
            apply_seeds(&mut plan, seeds.as_deref())?;
            let rows = compare_backends(&plan)?;
            with_output(out.as_deref(), |w| write_compare(w, &rows))
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
