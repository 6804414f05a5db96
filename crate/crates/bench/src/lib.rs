//! Experiment harness for `batched-nsga3`: grid plans, per-generation
//! result files, summaries and backend timing comparisons.

pub mod compare;
pub mod error;
pub mod plan;
pub mod results;
pub mod runner;
pub mod summary;

pub use compare::{compare_backends, compare_with, CompareRow};
pub use error::{BenchError, Result};
pub use plan::{fingerprint, ExperimentPlan};
pub use results::{read_rows, write_rows, ResultRow, COLUMNS};
pub use runner::{run_plan, sidecar_path, PlanReport, RunFailure, WORKERS_ENV};
pub use summary::{summarize, summarize_rows, Stat, Summary};
