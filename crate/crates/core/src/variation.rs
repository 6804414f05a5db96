//! Offspring generation: random pairing, simulated binary crossover,
//! polynomial mutation, and uniform crossover with bit-flip for binary
//! genomes.
//!
//! Every pair and every row draws from its own forked random stream, so the
//! result does not depend on the order in which pairs are processed.

use ndarray::{Array2, ArrayView1};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::batchcore::{permutation, StreamRng};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VariationConfig {
    /// SBX distribution index.
    pub eta_c: f64,
    /// Polynomial mutation distribution index.
    pub eta_m: f64,
    /// Crossover probability per parent pair.
    pub p_c: f64,
    /// Mutation probability per variable; `None` means `1 / d`.
    pub p_m: Option<f64>,
    /// Binary tournament on front rank instead of random pairing.
    pub tournament: bool,
}

impl Default for VariationConfig {
    fn default() -> Self {
        Self {
            eta_c: 20.0,
            eta_m: 20.0,
            p_c: 1.0,
            p_m: None,
            tournament: false,
        }
    }
}

/// Per-variable box constraints.
#[derive(Debug, Clone, PartialEq)]
pub struct Bounds {
    pub low: Vec<f64>,
    pub high: Vec<f64>,
}

impl Bounds {
    pub fn uniform(d: usize, low: f64, high: f64) -> Self {
        Self {
            low: vec![low; d],
            high: vec![high; d],
        }
    }

    pub fn dim(&self) -> usize {
        self.low.len()
    }
}

/// Validated operator set for one problem.
#[derive(Debug, Clone)]
pub struct Operators {
    pub eta_c: f64,
    pub eta_m: f64,
    pub p_c: f64,
    pub p_m: f64,
    pub tournament: bool,
    pub bounds: Bounds,
}

fn probability(field: &'static str, p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::config(field, format!("{p} is not a probability")))
    }
}

impl Operators {
    pub fn new(cfg: &VariationConfig, bounds: Bounds) -> Result<Self> {
        if !(cfg.eta_c > 0.0) {
            return Err(Error::config("eta_c", "must be positive"));
        }
        if !(cfg.eta_m > 0.0) {
            return Err(Error::config("eta_m", "must be positive"));
        }
        if bounds.low.len() != bounds.high.len() || bounds.low.is_empty() {
            return Err(Error::config("bounds", "low/high length mismatch or empty"));
        }
        if bounds.low.iter().zip(&bounds.high).any(|(l, h)| !(l < h)) {
            return Err(Error::config("bounds", "low must be below high"));
        }
        let d = bounds.dim();
        Ok(Self {
            eta_c: cfg.eta_c,
            eta_m: cfg.eta_m,
            p_c: probability("p_c", cfg.p_c)?,
            p_m: probability("p_m", cfg.p_m.unwrap_or(1.0 / d as f64))?,
            tournament: cfg.tournament,
            bounds,
        })
    }

    fn clamp(&self, j: usize, x: f64) -> f64 {
        x.clamp(self.bounds.low[j], self.bounds.high[j])
    }

    /// SBX on one pair of parents; children are clamped to the bounds.
    pub fn sbx_pair(
        &self,
        p1: ArrayView1<f64>,
        p2: ArrayView1<f64>,
        rng: &StreamRng,
    ) -> (Vec<f64>, Vec<f64>) {
        let mut gen = rng.generator();
        let mut c1 = p1.to_vec();
        let mut c2 = p2.to_vec();
        if gen.random::<f64>() < self.p_c {
            for j in 0..c1.len() {
                let beta = spread_factor(gen.random::<f64>(), self.eta_c);
                let (a, b) = sbx_children(p1[j], p2[j], beta);
                c1[j] = self.clamp(j, a);
                c2[j] = self.clamp(j, b);
            }
        }
        (c1, c2)
    }

    /// Polynomial mutation applied row by row.
    pub fn polynomial_mutation(&self, x: &Array2<f64>, rng: &StreamRng) -> Array2<f64> {
        let mut out = x.clone();
        for (r, mut row) in out.rows_mut().into_iter().enumerate() {
            let mut gen = rng.fork(r as u64).generator();
            for (j, v) in row.iter_mut().enumerate() {
                let gate = gen.random::<f64>();
                let u = gen.random::<f64>();
                if gate < self.p_m {
                    let (lo, hi) = (self.bounds.low[j], self.bounds.high[j]);
                    *v = self.clamp(j, *v + mutation_delta(u, self.eta_m, *v, lo, hi) * (hi - lo));
                }
            }
        }
        out
    }

    /// `n` children from `n` parents via SBX and polynomial mutation.
    pub fn real_offspring(&self, parents: &Array2<f64>, ranks: &[i32], rng: &StreamRng) -> Result<Array2<f64>> {
        let pairs = self.pairs(parents.nrows(), ranks, &rng.fork(0))?;
        let mut children = Array2::zeros(parents.raw_dim());
        let pair_rng = rng.fork(1);
        for (i, &(a, b)) in pairs.iter().enumerate() {
            let (c1, c2) = self.sbx_pair(parents.row(a), parents.row(b), &pair_rng.fork(i as u64));
            children.row_mut(2 * i).assign(&ArrayView1::from(&c1));
            children.row_mut(2 * i + 1).assign(&ArrayView1::from(&c2));
        }
        Ok(self.polynomial_mutation(&children, &rng.fork(2)))
    }

    /// `n` children from `n` bit-string parents.
    pub fn binary_offspring(&self, parents: &Array2<f64>, ranks: &[i32], rng: &StreamRng) -> Result<Array2<f64>> {
        let pairs = self.pairs(parents.nrows(), ranks, &rng.fork(0))?;
        Ok(binary_variation(parents, &pairs, self.p_c, self.p_m, &rng.fork(1)))
    }

    fn pairs(&self, n: usize, ranks: &[i32], rng: &StreamRng) -> Result<Vec<(usize, usize)>> {
        if self.tournament {
            tournament_pool(ranks, rng)
        } else {
            mating_pool(n, rng)
        }
    }
}

/// SBX spread factor for a uniform draw `u`.
pub fn spread_factor(u: f64, eta: f64) -> f64 {
    let e = 1.0 / (eta + 1.0);
    if u <= 0.5 {
        (2.0 * u).powf(e)
    } else {
        (1.0 / (2.0 * (1.0 - u))).powf(e)
    }
}

/// Unclamped SBX children for spread factor `beta`.
pub fn sbx_children(p1: f64, p2: f64, beta: f64) -> (f64, f64) {
    (
        0.5 * ((1.0 + beta) * p1 + (1.0 - beta) * p2),
        0.5 * ((1.0 - beta) * p1 + (1.0 + beta) * p2),
    )
}

/// Bound-aware polynomial mutation step, as a fraction of `hi - lo`.
pub fn mutation_delta(u: f64, eta: f64, x: f64, lo: f64, hi: f64) -> f64 {
    let span = hi - lo;
    let e = 1.0 / (eta + 1.0);
    if u < 0.5 {
        let d1 = (x - lo) / span;
        let v = 2.0 * u + (1.0 - 2.0 * u) * (1.0 - d1).powf(eta + 1.0);
        v.powf(e) - 1.0
    } else {
        let d2 = (hi - x) / span;
        let v = 2.0 * (1.0 - u) + 2.0 * (u - 0.5) * (1.0 - d2).powf(eta + 1.0);
        1.0 - v.powf(e)
    }
}

/// Random permutation of `0..n` cut into consecutive pairs.
pub fn mating_pool(n: usize, rng: &StreamRng) -> Result<Vec<(usize, usize)>> {
    if n % 2 == 1 {
        return Err(Error::Parameter(format!("mating pool needs an even population, got {n}")));
    }
    let perm = permutation(n, rng);
    Ok(perm.chunks_exact(2).map(|c| (c[0], c[1])).collect())
}

/// Binary tournaments on rank (lower wins, ties at random), winners paired
/// in draw order.
pub fn tournament_pool(ranks: &[i32], rng: &StreamRng) -> Result<Vec<(usize, usize)>> {
    let n = ranks.len();
    if n % 2 == 1 || n == 0 {
        return Err(Error::Parameter(format!("mating pool needs an even population, got {n}")));
    }
    let mut gen = rng.generator();
    let winners: Vec<usize> = (0..n)
        .map(|_| {
            let a = gen.random_range(0..n);
            let b = gen.random_range(0..n);
            match ranks[a].cmp(&ranks[b]) {
                std::cmp::Ordering::Less => a,
                std::cmp::Ordering::Greater => b,
                std::cmp::Ordering::Equal => {
                    if gen.random::<bool>() {
                        a
                    } else {
                        b
                    }
                }
            }
        })
        .collect();
    Ok(winners.chunks_exact(2).map(|c| (c[0], c[1])).collect())
}

/// Uniform crossover per pair (probability `p_c`) followed by independent
/// bit flips (probability `p_m`). Children of pair `i` land in rows `2i`
/// and `2i + 1`.
pub fn binary_variation(
    x: &Array2<f64>,
    pairs: &[(usize, usize)],
    p_c: f64,
    p_m: f64,
    rng: &StreamRng,
) -> Array2<f64> {
    let d = x.ncols();
    let mut out = Array2::zeros((pairs.len() * 2, d));
    for (i, &(a, b)) in pairs.iter().enumerate() {
        let mut gen = rng.fork(i as u64).generator();
        let cross = gen.random::<f64>() < p_c;
        for j in 0..d {
            let (mut u, mut v) = (x[[a, j]], x[[b, j]]);
            if cross && gen.random::<bool>() {
                std::mem::swap(&mut u, &mut v);
            }
            if gen.random::<f64>() < p_m {
                u = 1.0 - u;
            }
            if gen.random::<f64>() < p_m {
                v = 1.0 - v;
            }
            out[[2 * i, j]] = u;
            out[[2 * i + 1, j]] = v;
        }
    }
    out
}
