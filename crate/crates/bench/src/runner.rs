//! Executes an [`ExperimentPlan`] and writes its result file.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use batched_nsga3::engine::{Engine, RunConfig, RunHistory};
use batched_nsga3::metrics::normalized_hv;
use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{BenchError, Result};
use crate::plan::{fingerprint, Cell, ExperimentPlan};
use crate::results::{write_rows, ResultRow};

/// Environment variable capping the number of cells run concurrently.
pub const WORKERS_ENV: &str = "BNSGA3_WORKERS";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunFailure {
    pub fingerprint: String,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanReport {
    pub output: PathBuf,
    pub rows: usize,
    pub runs: usize,
    /// `(fingerprint, seed)` of runs stopped by the time limit.
    pub timed_out: Vec<(String, u64)>,
    pub failures: Vec<RunFailure>,
}

struct RunOutcome {
    fingerprint: String,
    cfg: RunConfig,
    history: std::result::Result<RunHistory, String>,
}

#[derive(Serialize)]
struct Sidecar<'a> {
    /// Configurations with the seed cleared, keyed by fingerprint.
    configs: BTreeMap<String, RunConfig>,
    failures: &'a [RunFailure],
}

/// Worker count: the plan's timing flag forces one, the environment
/// variable caps the rest.
pub fn worker_count(plan: &ExperimentPlan) -> usize {
    if plan.timing {
        return 1;
    }
    let available = std::thread::available_parallelism().map_or(1, |n| n.get());
    match std::env::var(WORKERS_ENV).ok().and_then(|v| v.trim().parse::<usize>().ok()) {
        Some(cap) if cap > 0 => available.min(cap),
        _ => available,
    }
}

/// Path of the JSON file listing the configuration behind each
/// fingerprint and any failed runs.
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.file_name().map(|n| n.to_os_string()).unwrap_or_default();
    name.push(".configs.json");
    out.with_file_name(name)
}

fn run_cell(plan: &ExperimentPlan, cell: &Cell, seeds: &[u64]) -> Vec<RunOutcome> {
    let deadline = plan.time_limit.map(|t| Instant::now() + Duration::from_secs_f64(t));
    seeds
        .iter()
        .map(|&seed| {
            let cfg = plan.config(cell, seed);
            let history = Engine::new(cfg.clone())
                .and_then(|e| e.run_until(deadline))
                .map_err(|e| e.to_string());
            RunOutcome {
                fingerprint: fingerprint(&cfg),
                cfg,
                history,
            }
        })
        .collect()
}

/// Runs every cell of the plan and writes the result CSV to `out`, plus a
/// sidecar next to it. Both files are written to a temporary file first
/// and renamed into place, so a failed write leaves no partial output.
///
/// A failing run is recorded in the report and the sidecar; the other
/// runs are unaffected.
pub fn run_plan(plan: &ExperimentPlan, out: &Path) -> Result<PlanReport> {
    plan.validate()?;
    let seeds = plan.seeds();
    let cells = plan.cells();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_count(plan))
        .build()
        .map_err(|e| BenchError::Config(e.to_string()))?;
    let outcomes: Vec<RunOutcome> = pool.install(|| {
        cells
            .par_iter()
            .map(|cell| run_cell(plan, cell, &seeds))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    });

    let hv = collection_hv(&outcomes)?;
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    let mut timed_out = Vec::new();
    for (i, outcome) in outcomes.iter().enumerate() {
        let history = match &outcome.history {
            Ok(h) => h,
            Err(e) => {
                failures.push(RunFailure {
                    fingerprint: outcome.fingerprint.clone(),
                    seed: outcome.cfg.seed,
                    error: e.clone(),
                });
                continue;
            }
        };
        if history.timed_out {
            timed_out.push((outcome.fingerprint.clone(), outcome.cfg.seed));
        }
        for record in &history.records {
            let (raw, normalized) = hv.get(&(i, record.generation)).copied().unwrap_or((None, None));
            rows.push(ResultRow {
                fingerprint: outcome.fingerprint.clone(),
                seed: outcome.cfg.seed,
                generation: record.generation,
                igd: record.igd,
                hv_raw: record.hv_raw.or(raw),
                hv_normalized: normalized,
                t_variation: record.timings.variation,
                t_sort: record.timings.sort,
                t_niche: record.timings.niche,
                t_eval: record.timings.eval,
                timed_out: history.timed_out,
            });
        }
    }

    let configs = outcomes
        .iter()
        .map(|o| (o.fingerprint.clone(), RunConfig { seed: 0, ..o.cfg.clone() }))
        .collect();
    let sidecar = Sidecar {
        configs,
        failures: &failures,
    };
    let sidecar_json = serde_json::to_vec_pretty(&sidecar).expect("configs serialize");
    write_atomic(out, |f| write_rows(f, &rows))?;
    write_atomic(&sidecar_path(out), |f| f.write_all(&sidecar_json).map_err(|e| BenchError::io(out, e)))?;

    Ok(PlanReport {
        output: out.to_path_buf(),
        rows: rows.len(),
        runs: outcomes.len(),
        timed_out,
        failures,
    })
}

type HvCells = BTreeMap<(usize, usize), (Option<f64>, Option<f64>)>;

/// `(run index, generation, front)`.
type FrontRef<'a> = (usize, usize, &'a Array2<f64>);

/// Raw and normalized hypervolume of every recorded front, normalized
/// over all fronts of the same problem.
fn collection_hv(outcomes: &[RunOutcome]) -> Result<HvCells> {
    let mut groups: BTreeMap<String, Vec<FrontRef>> = BTreeMap::new();
    for (i, o) in outcomes.iter().enumerate() {
        if let Ok(h) = &o.history {
            let key = serde_json::to_string(&o.cfg.problem).expect("problems serialize");
            let group = groups.entry(key).or_default();
            group.extend(h.fronts.iter().filter(|(_, f)| f.nrows() > 0).map(|(g, f)| (i, *g, f)));
        }
    }
    let mut cells = HvCells::new();
    for group in groups.values() {
        if group.is_empty() {
            continue;
        }
        let fronts: Vec<Array2<f64>> = group.iter().map(|(_, _, f)| (*f).clone()).collect();
        let nhv = normalized_hv(&fronts)?;
        for (k, &(i, g, _)) in group.iter().enumerate() {
            let value = if nhv.degenerate {
                (None, None)
            } else {
                (Some(nhv.raw[k]), Some(nhv.normalized[k]))
            };
            cells.insert((i, g), value);
        }
    }
    Ok(cells)
}

fn write_atomic(path: &Path, fill: impl FnOnce(&mut std::fs::File) -> Result<()>) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| BenchError::io(dir, e))?;
    fill(tmp.as_file_mut())?;
    tmp.as_file().sync_all().map_err(|e| BenchError::io(path, e))?;
    tmp.persist(path).map_err(|e| BenchError::io(path, e.error))?;
    Ok(())
}
