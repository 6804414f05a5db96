//! Timing comparison of two niche backends on identical seeds.

use batched_nsga3::engine::Engine;
use batched_nsga3::niche::Backend;
use batched_nsga3::stats::mean;
use serde::Serialize;

use crate::error::Result;
use crate::plan::ExperimentPlan;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareRow {
    pub n: usize,
    /// Mean seconds per generation, generation 1 excluded.
    pub baseline_total: f64,
    pub candidate_total: f64,
    /// `baseline / candidate`; above one means the candidate is faster.
    pub total_ratio: f64,
    pub baseline_niche: f64,
    pub candidate_niche: f64,
    pub niche_ratio: f64,
}

/// Per-generation `(total, niche)` seconds of one run, warm-up dropped.
fn generation_times(plan: &ExperimentPlan, n: usize, seed: u64, backend: Backend) -> Result<(Vec<f64>, Vec<f64>)> {
    let cell = crate::plan::Cell {
        problem: plan.problems[0],
        n,
        generations: plan.generations[0],
    };
    let mut cfg = plan.config(&cell, seed);
    cfg.backend = backend;
    let history = Engine::new(cfg)?.run()?;
    let timed = history.records.iter().filter(|r| r.generation > 1);
    Ok(timed.map(|r| (r.timings.total(), r.timings.niche)).unzip())
}

/// Runs the first problem and generation count of `plan` for every
/// population size and seed under both backends, strictly one run at a
/// time. One row per population size.
pub fn compare_with(plan: &ExperimentPlan, baseline: Backend, candidate: Backend) -> Result<Vec<CompareRow>> {
    plan.validate()?;
    let mut rows = Vec::with_capacity(plan.populations.len());
    for &n in &plan.populations {
        let (mut bt, mut bn, mut ct, mut cn) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
        for seed in plan.seeds() {
            let (t, nt) = generation_times(plan, n, seed, baseline)?;
            bt.extend(t);
            bn.extend(nt);
            let (t, nt) = generation_times(plan, n, seed, candidate)?;
            ct.extend(t);
            cn.extend(nt);
        }
        let avg = |xs: &[f64]| if xs.is_empty() { f64::NAN } else { mean(xs) };
        let (baseline_total, candidate_total) = (avg(&bt), avg(&ct));
        let (baseline_niche, candidate_niche) = (avg(&bn), avg(&cn));
        rows.push(CompareRow {
            n,
            baseline_total,
            candidate_total,
            total_ratio: baseline_total / candidate_total,
            baseline_niche,
            candidate_niche,
            niche_ratio: baseline_niche / candidate_niche,
        });
    }
    Ok(rows)
}

/// Oracle against batched.
pub fn compare_backends(plan: &ExperimentPlan) -> Result<Vec<CompareRow>> {
    compare_with(plan, Backend::Oracle, Backend::Batched)
}

pub fn write_compare<W: std::io::Write>(out: W, rows: &[CompareRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| crate::BenchError::io("<compare>", std::io::Error::other(e));
    for row in rows {
        w.serialize(row).map_err(io)?;
    }
    w.flush().map_err(|e| crate::BenchError::io("<compare>", e))
}
