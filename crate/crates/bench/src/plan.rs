//! Experiment plans: a grid of problems, population sizes and generation
//! counts, each cell run once per seed.

use std::path::{Path, PathBuf};

use batched_nsga3::engine::{MetricSchedule, RunConfig};
use batched_nsga3::niche::{Backend, DistanceForm};
use batched_nsga3::problems::ProblemConfig;
use batched_nsga3::variation::VariationConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{BenchError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentPlan {
    pub problems: Vec<ProblemConfig>,
    pub populations: Vec<usize>,
    pub generations: Vec<usize>,
    /// Explicit seeds; when absent, seeds are `0..repetitions`.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
    #[serde(default = "one")]
    pub repetitions: usize,
    /// Seconds per cell.
    #[serde(default)]
    pub time_limit: Option<f64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default)]
    pub variation: VariationConfig,
    #[serde(default)]
    pub distance: DistanceForm,
    #[serde(default)]
    pub metrics: MetricSchedule,
    /// Run cells one at a time so timings are not skewed by contention.
    #[serde(default)]
    pub timing: bool,
}

fn one() -> usize {
    1
}

/// One grid point; all seeds of a cell run sequentially.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub problem: ProblemConfig,
    pub n: usize,
    pub generations: usize,
}

impl ExperimentPlan {
    pub fn from_toml(text: &str) -> Result<Self> {
        let plan: Self = toml::from_str(text).map_err(|e| BenchError::Config(e.to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.problems.is_empty() || self.populations.is_empty() || self.generations.is_empty() {
            return Err(BenchError::Config("plan has no cells".into()));
        }
        if self.repetitions == 0 {
            return Err(BenchError::Config("repetitions must be at least 1".into()));
        }
        if self.seeds.as_ref().is_some_and(|s| s.is_empty()) {
            return Err(BenchError::Config("seed list is empty".into()));
        }
        if let Some(t) = self.time_limit {
            if !(t > 0.0) {
                return Err(BenchError::Config(format!("time_limit must be positive, got {t}")));
            }
        }
        for cell in self.cells() {
            self.config(&cell, 0).validate()?;
        }
        Ok(())
    }

    pub fn seeds(&self) -> Vec<u64> {
        match &self.seeds {
            Some(s) => s.clone(),
            None => (0..self.repetitions as u64).collect(),
        }
    }

    pub fn cells(&self) -> Vec<Cell> {
        let mut cells = Vec::new();
        for problem in &self.problems {
            for &n in &self.populations {
                for &generations in &self.generations {
                    cells.push(Cell {
                        problem: *problem,
                        n,
                        generations,
                    });
                }
            }
        }
        cells
    }

    pub fn config(&self, cell: &Cell, seed: u64) -> RunConfig {
        RunConfig {
            problem: cell.problem,
            n: cell.n,
            generations: cell.generations,
            seed,
            backend: self.backend,
            variation: self.variation.clone(),
            reference_points: None,
            distance: self.distance,
            metrics: self.metrics.clone(),
        }
    }
}

/// Hash of the configuration with the seed cleared.
pub fn fingerprint(cfg: &RunConfig) -> String {
    let mut unseeded = cfg.clone();
    unseeded.seed = 0;
    let json = serde_json::to_string(&unseeded).expect("configs serialize");
    let digest = Sha256::digest(json.as_bytes());
    hex::encode(&digest[..8])
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLAN: &str = r#"
populations = [20, 40]
generations = [5, 10]
repetitions = 3

[[problems]]
kind = "dtlz2"
m = 3
d = 6
"#;

    #[test]
    fn grid_expansion() {
        let plan = ExperimentPlan::from_toml(PLAN).unwrap();
        assert_eq!(plan.cells().len(), 4);
        assert_eq!(plan.seeds(), vec![0, 1, 2]);
        assert_eq!(plan.backend, Backend::Batched);
    }

    #[test]
    fn fingerprint_ignores_seed_only() {
        let plan = ExperimentPlan::from_toml(PLAN).unwrap();
        let cells = plan.cells();
        let a = fingerprint(&plan.config(&cells[0], 1));
        assert_eq!(a, fingerprint(&plan.config(&cells[0], 2)));
        assert_ne!(a, fingerprint(&plan.config(&cells[1], 1)));
        assert_eq!(a.len(), 16);
    }

    #[test]
    fn full_plan_parses() {
        let text = r#"
populations = [50, 200, 800]
generations = [100]
repetitions = 10
time_limit = 600.0
backend = "oracle"
output = "results.csv"
timing = true

[metrics]
every = 0

[[problems]]
kind = "dtlz2"
m = 3
d = 12

[[problems]]
kind = "mnk"
m = 3
n = 32
k = 4
instance_seed = 0
"#;
        let plan = ExperimentPlan::from_toml(text).unwrap();
        assert_eq!(plan.cells().len(), 6);
        assert_eq!(plan.backend, Backend::Oracle);
        assert_eq!(plan.output.as_deref(), Some(Path::new("results.csv")));
    }

    #[test]
    fn invalid_plans_are_rejected() {
        assert!(ExperimentPlan::from_toml("populations = []\ngenerations = [1]\nproblems = []").is_err());
        let odd = PLAN.replace("[20, 40]", "[21]");
        assert!(matches!(ExperimentPlan::from_toml(&odd), Err(BenchError::Core(_))));
        let zero = PLAN.replace("repetitions = 3", "repetitions = 0");
        assert!(matches!(ExperimentPlan::from_toml(&zero), Err(BenchError::Config(_))));
        let unknown = format!("{PLAN}\nbogus = 1");
        assert!(ExperimentPlan::from_toml(&unknown).is_err());
    }
}
