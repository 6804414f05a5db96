//! Per-configuration statistics over a result file.

use std::collections::BTreeMap;
use std::path::Path;

use batched_nsga3::stats::{mean, std_dev, t_interval};
use serde::Serialize;

use crate::error::{BenchError, Result};
use crate::results::{read_rows, ResultRow};

/// Mean, sample standard deviation and 95% t-interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Stat {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Option<Self> {
        if xs.is_empty() {
            return None;
        }
        let (ci_low, ci_high) = t_interval(xs, 0.95);
        Some(Self {
            count: xs.len(),
            mean: mean(xs),
            sd: std_dev(xs),
            ci_low,
            ci_high,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub fingerprint: String,
    pub runs: usize,
    pub timed_out: usize,
    /// Final-generation IGD over runs.
    pub igd: Option<Stat>,
    /// Final-generation normalized hypervolume over runs.
    pub hv_normalized: Option<Stat>,
    /// Mean seconds per generation of each run, generation 1 excluded.
    pub time_per_generation: Option<Stat>,
    pub niche_per_generation: Option<Stat>,
}

/// Groups rows by fingerprint, in order of first appearance.
pub fn summarize_rows(rows: &[ResultRow]) -> Vec<Summary> {
    let mut order: Vec<&str> = Vec::new();
    let mut runs: BTreeMap<(&str, u64), Vec<&ResultRow>> = BTreeMap::new();
    for row in rows {
        if !order.contains(&row.fingerprint.as_str()) {
            order.push(&row.fingerprint);
        }
        runs.entry((&row.fingerprint, row.seed)).or_default().push(row);
    }
    order
        .into_iter()
        .map(|fp| {
            let group: Vec<&Vec<&ResultRow>> = runs.range((fp, 0)..=(fp, u64::MAX)).map(|(_, v)| v).collect();
            let mut igd = Vec::new();
            let mut hv = Vec::new();
            let mut total = Vec::new();
            let mut niche = Vec::new();
            let mut timed_out = 0;
            for run in &group {
                let last = run.iter().max_by_key(|r| r.generation).expect("non-empty run");
                igd.extend(last.igd);
                hv.extend(last.hv_normalized);
                timed_out += last.timed_out as usize;
                let timed: Vec<&&ResultRow> = run.iter().filter(|r| r.generation > 1).collect();
                if !timed.is_empty() {
                    total.push(timed.iter().map(|r| r.t_total()).sum::<f64>() / timed.len() as f64);
                    niche.push(timed.iter().map(|r| r.t_niche).sum::<f64>() / timed.len() as f64);
                }
            }
            Summary {
                fingerprint: fp.to_string(),
                runs: group.len(),
                timed_out,
                igd: Stat::of(&igd),
                hv_normalized: Stat::of(&hv),
                time_per_generation: Stat::of(&total),
                niche_per_generation: Stat::of(&niche),
            }
        })
        .collect()
}

pub fn summarize(path: &Path) -> Result<Vec<Summary>> {
    let file = std::fs::File::open(path).map_err(|e| BenchError::io(path, e))?;
    Ok(summarize_rows(&read_rows(std::io::BufReader::new(file))?))
}

/// Flat CSV rendering of summaries.
pub fn write_summaries<W: std::io::Write>(out: W, summaries: &[Summary]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["fingerprint".to_string(), "runs".into(), "timed_out".into()];
    for name in ["igd", "hv_normalized", "time_per_generation", "niche_per_generation"] {
        for part in ["mean", "sd", "ci_low", "ci_high"] {
            header.push(format!("{name}_{part}"));
        }
    }
    let io = |e: csv::Error| BenchError::io("<summary>", std::io::Error::other(e));
    w.write_record(&header).map_err(io)?;
    for s in summaries {
        let mut rec = vec![s.fingerprint.clone(), s.runs.to_string(), s.timed_out.to_string()];
        for stat in [s.igd, s.hv_normalized, s.time_per_generation, s.niche_per_generation] {
            match stat {
                Some(st) => rec.extend([st.mean, st.sd, st.ci_low, st.ci_high].map(|v| v.to_string())),
                None => rec.extend(std::iter::repeat_n(String::new(), 4)),
            }
        }
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| BenchError::io("<summary>", e))
}
