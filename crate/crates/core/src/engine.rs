//! The generational loop: variation, evaluation, sorting, niche selection.

use std::time::Instant;

use ndarray::{concatenate, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::batchcore::{MaskedMatrix, StreamRng};
use crate::dominance::{non_dominated_sort, split_fronts, FrontSplit, DROPPED};
use crate::error::{Error, Result};
use crate::metrics::{hv, igd, nondominated, MetricRecord, PhaseTimings};
use crate::niche::{batched_select, oracle_select, Backend, BatchedOptions, DistanceForm, NicheInput, Normalizer};
use crate::problems::{Problem, ProblemConfig};
use crate::refpoints::{choose_divisions, Divisions, ReferencePointSet};
use crate::variation::{Operators, VariationConfig};

/// Which generations get metrics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MetricSchedule {
    /// Compute metrics every this many generations; 0 means only after
    /// the last one. The last generation is always included.
    pub every: usize,
    /// Size of the Pareto-front sample used for IGD.
    pub igd_reference: usize,
    /// Reference point for raw hypervolume; `None` leaves `hv_raw` empty.
    pub hv_reference: Option<Vec<f64>>,
}

impl Default for MetricSchedule {
    fn default() -> Self {
        Self {
            every: 0,
            igd_reference: 10_000,
            hv_reference: None,
        }
    }
}

impl MetricSchedule {
    pub fn includes(&self, generation: usize, last: usize) -> bool {
        generation == last || (self.every > 0 && generation.is_multiple_of(self.every))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    /// Population size.
    pub n: usize,
    pub generations: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub backend: Backend,
    #[serde(default)]
    pub variation: VariationConfig,
    /// Reference lattice; `None` picks one with at most `n` points.
    #[serde(default)]
    pub reference_points: Option<Divisions>,
    #[serde(default)]
    pub distance: DistanceForm,
    #[serde(default)]
    pub metrics: MetricSchedule,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let m = self.problem.objectives();
        if self.n < 2 || !self.n.is_multiple_of(2) {
            return Err(Error::config("n", format!("population size must be even and at least 2, got {}", self.n)));
        }
        if self.n < m {
            return Err(Error::config("n", format!("population size {} below objective count {m}", self.n)));
        }
        if self.generations == 0 {
            return Err(Error::config("generations", "must be at least 1"));
        }
        if self.metrics.igd_reference == 0 {
            return Err(Error::config("metrics.igd_reference", "must be positive"));
        }
        if let Some(r) = &self.metrics.hv_reference {
            if r.len() != m {
                return Err(Error::config("metrics.hv_reference", format!("expected {m} values, got {}", r.len())));
            }
        }
        Ok(())
    }
}

/// Population and bookkeeping between generations.
#[derive(Debug, Clone)]
pub struct RunState {
    pub generation: usize,
    pub population: Array2<f64>,
    pub objectives: Array2<f64>,
    /// Front rank of each member in the merged population it survived.
    pub ranks: Vec<i32>,
    pub normalizer: Normalizer,
    pub rng: StreamRng,
    pub evaluations: usize,
    pub timings: PhaseTimings,
}

/// Indices kept from a merged population.
#[derive(Debug, Clone, PartialEq)]
pub struct Survivors {
    pub indices: Vec<usize>,
    /// Sorted front ranks of the survivors.
    pub ranks: Vec<i32>,
    pub split: FrontSplit,
    /// Loop iterations of the batched selector; 0 otherwise.
    pub iterations: usize,
}

/// Result of [`Engine::run`].
#[derive(Debug, Clone)]
pub struct RunHistory {
    pub records: Vec<MetricRecord>,
    /// Non-dominated objectives at each scheduled generation.
    pub fronts: Vec<(usize, Array2<f64>)>,
    pub population: Array2<f64>,
    pub objectives: Array2<f64>,
    pub timed_out: bool,
}

/// A configured run: problem, reference directions, operators.
#[derive(Debug, Clone)]
pub struct Engine {
    cfg: RunConfig,
    problem: Problem,
    refs: ReferencePointSet,
    ops: Operators,
    pf: Option<Array2<f64>>,
}

impl Engine {
    pub fn new(cfg: RunConfig) -> Result<Self> {
        cfg.validate()?;
        let problem = cfg.problem.build()?;
        let m = problem.objectives();
        let divisions = match cfg.reference_points {
            Some(d) => d,
            None => choose_divisions(m, cfg.n)?,
        };
        let refs = ReferencePointSet::build(m, divisions)?;
        let ops = Operators::new(&cfg.variation, problem.bounds())?;
        let pf = match &problem {
            Problem::Continuous(p) => Some(p.pf_sample(cfg.metrics.igd_reference)?),
            _ => None,
        };
        Ok(Self {
            cfg,
            problem,
            refs,
            ops,
            pf,
        })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn reference_points(&self) -> &ReferencePointSet {
        &self.refs
    }

    /// Uniform random population (bits for binary problems), evaluated.
    pub fn initialize(&self) -> Result<RunState> {
        let rng = StreamRng::new(self.cfg.seed, 0);
        let mut gen = rng.fork(0).generator();
        let (n, d) = (self.cfg.n, self.problem.variables());
        let binary = self.problem.is_binary();
        let bounds = self.problem.bounds();
        let mut population = Array2::from_shape_fn((n, d), |(_, j)| {
            if binary {
                gen.random_bool(0.5) as u8 as f64
            } else {
                bounds.low[j] + (bounds.high[j] - bounds.low[j]) * gen.random::<f64>()
            }
        });
        let objectives = self.problem.evaluate(&mut population)?;
        Ok(RunState {
            generation: 0,
            population,
            objectives,
            ranks: vec![0; n],
            normalizer: Normalizer::new(),
            rng,
            evaluations: n,
            timings: PhaseTimings::default(),
        })
    }

    /// Picks `n` survivors from a merged objective matrix.
    pub fn survivors(&self, objectives: &Array2<f64>, normalizer: &mut Normalizer, rng: &StreamRng, timings: &mut PhaseTimings) -> Result<Survivors> {
        let n = self.cfg.n;
        let t = Instant::now();
        let all = MaskedMatrix::full(objectives.clone());
        let mut ranks = non_dominated_sort(&all);
        let sorted = ranks.clone();
        let split = split_fronts(&mut ranks, n)?;
        timings.sort += t.elapsed().as_secs_f64();

        let t = Instant::now();
        let valid: Vec<bool> = ranks.ranks().iter().map(|&r| r != DROPPED).collect();
        let candidates = MaskedMatrix::new(objectives.clone(), valid)?;
        let (kept, iterations) = if split.is_exact() {
            normalizer.observe(&candidates)?;
            (ranks.ranks().iter().map(|&r| r != DROPPED).collect::<Vec<bool>>(), 0)
        } else {
            let normalized = normalizer.normalize(&candidates)?.values;
            let input = NicheInput {
                normalized: &normalized,
                ranks: &ranks,
                split,
                n,
                refs: &self.refs,
                form: self.cfg.distance,
            };
            let outcome = match self.cfg.backend {
                Backend::Batched => batched_select(input, rng, BatchedOptions::default())?,
                Backend::Oracle => oracle_select(input, rng)?,
            };
            let iterations = if self.cfg.backend == Backend::Batched { outcome.iterations } else { 0 };
            (outcome.selected_mask(), iterations)
        };
        timings.niche += t.elapsed().as_secs_f64();

        let indices: Vec<usize> = (0..kept.len()).filter(|&i| kept[i]).collect();
        if indices.len() != n {
            return Err(Error::InfeasibleSelection {
                missing: n.saturating_sub(indices.len()),
            });
        }
        let ranks = indices.iter().map(|&i| sorted.ranks()[i]).collect();
        Ok(Survivors {
            indices,
            ranks,
            split,
            iterations,
        })
    }

    /// One generation. Returns the time spent in each phase.
    pub fn step(&self, state: &mut RunState) -> Result<PhaseTimings> {
        let mut timings = PhaseTimings::default();
        let rng = state.rng.fork(state.generation as u64 + 1);

        let t = Instant::now();
        let mut offspring = if self.problem.is_binary() {
            self.ops.binary_offspring(&state.population, &state.ranks, &rng.fork(0))?
        } else {
            self.ops.real_offspring(&state.population, &state.ranks, &rng.fork(0))?
        };
        timings.variation = t.elapsed().as_secs_f64();

        let t = Instant::now();
        let offspring_f = self.problem.evaluate(&mut offspring)?;
        timings.eval = t.elapsed().as_secs_f64();

        let merged_x = concatenate(Axis(0), &[state.population.view(), offspring.view()]).expect("same width");
        let merged_f = concatenate(Axis(0), &[state.objectives.view(), offspring_f.view()]).expect("same width");
        let kept = self.survivors(&merged_f, &mut state.normalizer, &rng.fork(1), &mut timings)?;

        state.population = merged_x.select(Axis(0), &kept.indices);
        state.objectives = merged_f.select(Axis(0), &kept.indices);
        state.ranks = kept.ranks;
        state.generation += 1;
        state.evaluations += self.cfg.n;
        state.timings.add(&timings);
        Ok(timings)
    }

    fn measure(&self, state: &RunState) -> Result<(Option<f64>, Option<f64>, Array2<f64>)> {
        let front = nondominated(&state.objectives);
        let igd = match &self.pf {
            Some(pf) => Some(igd(&front, pf)?),
            None => None,
        };
        let hv_raw = match &self.cfg.metrics.hv_reference {
            Some(r) => Some(hv(&front, r)?.value),
            None => None,
        };
        Ok((igd, hv_raw, front))
    }

    /// Full run.
    pub fn run(&self) -> Result<RunHistory> {
        self.run_until(None)
    }

    /// Full run that stops after the generation in which `deadline`
    /// passes. Records of completed generations are kept.
    pub fn run_until(&self, deadline: Option<Instant>) -> Result<RunHistory> {
        let mut state = self.initialize()?;
        let last = self.cfg.generations;
        let mut records = Vec::with_capacity(last);
        let mut fronts = Vec::new();
        let mut timed_out = false;
        while state.generation < last {
            let timings = self.step(&mut state)?;
            let g = state.generation;
            let (igd, hv_raw) = if self.cfg.metrics.includes(g, last) {
                let (igd, hv_raw, front) = self.measure(&state)?;
                fronts.push((g, front));
                (igd, hv_raw)
            } else {
                (None, None)
            };
            records.push(MetricRecord {
                generation: g,
                igd,
                hv_raw,
                hv_normalized: None,
                evaluations: state.evaluations,
                timings,
            });
            if g < last && deadline.is_some_and(|d| Instant::now() >= d) {
                timed_out = true;
                break;
            }
        }
        Ok(RunHistory {
            records,
            fronts,
            population: state.population,
            objectives: state.objectives,
            timed_out,
        })
    }
}

/// Builds the engine and runs it.
pub fn run(cfg: &RunConfig) -> Result<RunHistory> {
    Engine::new(cfg.clone())?.run()
}

