//! Benchmark problems. All objectives are minimized; maximization problems
//! (MNK-landscapes, knapsack) are negated when evaluated.

use std::f64::consts::PI;

use ndarray::{Array2, ArrayView1};
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::batchcore::StreamRng;
use crate::error::{Error, Result};
use crate::variation::Bounds;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtlzKind {
    Dtlz2,
    Dtlz3,
    Dtlz5,
    Dtlz7,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContinuousProblem {
    pub kind: DtlzKind,
    pub m: usize,
    pub d: usize,
}

impl ContinuousProblem {
    pub fn new(kind: DtlzKind, m: usize, d: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::config("m", format!("need at least 2 objectives, got {m}")));
        }
        if d < m {
            return Err(Error::config("d", format!("need d >= m = {m}, got {d}")));
        }
        Ok(Self { kind, m, d })
    }

    /// Number of distance variables.
    pub fn k(&self) -> usize {
        self.d - self.m + 1
    }

    pub fn bounds(&self) -> Bounds {
        Bounds::uniform(self.d, 0.0, 1.0)
    }

    pub fn evaluate(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.d {
            return Err(Error::shape(self.d, x.ncols()));
        }
        let mut out = Array2::zeros((x.nrows(), self.m));
        for (i, row) in x.rows().into_iter().enumerate() {
            let f = self.evaluate_row(row)?;
            out.row_mut(i).assign(&ArrayView1::from(&f));
        }
        Ok(out)
    }

    pub fn evaluate_row(&self, x: ArrayView1<f64>) -> Result<Vec<f64>> {
        if x.len() != self.d {
            return Err(Error::shape(self.d, x.len()));
        }
        if let Some((j, v)) = x.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Domain(format!("x[{j}] = {v} outside [0, 1]")));
        }
        let m = self.m;
        let tail = x.slice(ndarray::s![m - 1..]);
        Ok(match self.kind {
            DtlzKind::Dtlz2 => {
                let g = tail.iter().map(|v| (v - 0.5).powi(2)).sum::<f64>();
                let theta: Vec<f64> = x.iter().take(m - 1).map(|v| v * PI / 2.0).collect();
                spherical(&theta, 1.0 + g)
            }
            DtlzKind::Dtlz3 => {
                let s: f64 = tail.iter().map(|v| (v - 0.5).powi(2) - (20.0 * PI * (v - 0.5)).cos()).sum();
                let g = 100.0 * (self.k() as f64 + s);
                let theta: Vec<f64> = x.iter().take(m - 1).map(|v| v * PI / 2.0).collect();
                spherical(&theta, 1.0 + g)
            }
            DtlzKind::Dtlz5 => {
                let g = tail.iter().map(|v| (v - 0.5).powi(2)).sum::<f64>();
                let theta: Vec<f64> = (0..m - 1)
                    .map(|i| {
                        if i == 0 {
                            x[0] * PI / 2.0
                        } else {
                            PI / (4.0 * (1.0 + g)) * (1.0 + 2.0 * g * x[i])
                        }
                    })
                    .collect();
                spherical(&theta, 1.0 + g)
            }
            DtlzKind::Dtlz7 => {
                let g = 1.0 + 9.0 / self.k() as f64 * tail.sum();
                let mut f: Vec<f64> = x.iter().take(m - 1).copied().collect();
                let h = m as f64 - f.iter().map(|&fj| fj / (1.0 + g) * (1.0 + (3.0 * PI * fj).sin())).sum::<f64>();
                f.push((1.0 + g) * h);
                f
            }
        })
    }

    /// `count` points on the Pareto front, placed by a Halton sequence.
    pub fn pf_sample(&self, count: usize) -> Result<Array2<f64>> {
        if count == 0 {
            return Err(Error::Parameter("sample count must be positive".into()));
        }
        let m = self.m;
        let mut out = Array2::zeros((count, m));
        match self.kind {
            DtlzKind::Dtlz2 | DtlzKind::Dtlz3 => {
                let normal = Normal::new(0.0, 1.0).expect("standard normal");
                for i in 0..count {
                    let g: Vec<f64> = (0..m)
                        .map(|j| normal.inverse_cdf(halton(i as u64 + 1, PRIMES[j])).abs())
                        .collect();
                    let norm = g.iter().map(|v| v * v).sum::<f64>().sqrt();
                    for j in 0..m {
                        out[[i, j]] = g[j] / norm;
                    }
                }
            }
            DtlzKind::Dtlz5 => {
                // g = 0 collapses every angle after the first to pi/4
                let curve = ContinuousProblem::new(DtlzKind::Dtlz5, m, m)?;
                let mut x = vec![0.5; m];
                for i in 0..count {
                    x[0] = if count == 1 { 0.5 } else { i as f64 / (count - 1) as f64 };
                    out.row_mut(i).assign(&ArrayView1::from(&curve.evaluate_row(ArrayView1::from(&x))?));
                }
            }
            DtlzKind::Dtlz7 => {
                let set = RecordSet::dtlz7();
                for i in 0..count {
                    let mut h = 0.0;
                    for j in 0..m - 1 {
                        let fj = set.quantile(halton(i as u64 + 1, PRIMES[j]));
                        out[[i, j]] = fj;
                        h += fj * (1.0 + (3.0 * PI * fj).sin());
                    }
                    out[[i, m - 1]] = 2.0 * m as f64 - h;
                }
            }
        }
        Ok(out)
    }
}

fn spherical(theta: &[f64], radius: f64) -> Vec<f64> {
    let m = theta.len() + 1;
    (0..m)
        .map(|j| {
            let cosines: f64 = theta[..m - 1 - j].iter().map(|t| t.cos()).product();
            let sine = if j == 0 { 1.0 } else { theta[m - 1 - j].sin() };
            radius * cosines * sine
        })
        .collect()
}

const PRIMES: [u64; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109,
    113, 127, 131,
];

/// Radical inverse of `i` in the given base.
fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Points of [0, 1] where `phi(x) = x (1 + sin 3 pi x)` reaches a new running
/// maximum. The DTLZ7 front is the product of this set over the position
/// variables.
struct RecordSet {
    intervals: Vec<(f64, f64)>,
}

impl RecordSet {
    fn dtlz7() -> Self {
        let phi = |x: f64| x * (1.0 + (3.0 * PI * x).sin());
        let dphi = |x: f64| 1.0 + (3.0 * PI * x).sin() + 3.0 * PI * x * (3.0 * PI * x).cos();
        let steps = 100_000;
        let grid = |i: usize| i as f64 / steps as f64;
        let mut intervals = Vec::new();
        let mut best = 0.0;
        let mut start = Some(0.0);
        for i in 1..=steps {
            let (a, b) = (grid(i - 1), grid(i));
            let v = phi(b);
            match start {
                Some(s) if v < best => {
                    // running maximum peaked inside (a, b]
                    let end = bisect(dphi, a - 1.0 / steps as f64, b);
                    best = phi(end);
                    intervals.push((s, end));
                    start = None;
                }
                Some(_) => best = v,
                None if v > best => {
                    start = Some(bisect(|x| phi(x) - best, a, b));
                    best = v;
                }
                None => {}
            }
        }
        if let Some(s) = start {
            intervals.push((s, 1.0));
        }
        Self { intervals }
    }

    fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    #[cfg(test)]
    fn contains(&self, x: f64, tol: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| x >= a - tol && x <= b + tol)
    }

    /// Maps `u` in [0, 1] uniformly onto the set.
    fn quantile(&self, u: f64) -> f64 {
        let mut t = u * self.measure();
        for &(a, b) in &self.intervals {
            if t <= b - a {
                return a + t;
            }
            t -= b - a;
        }
        self.intervals.last().map_or(0.0, |iv| iv.1)
    }
}

/// Root of a sign change of `f` on `[a, b]`.
fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    for _ in 0..100 {
        let mid = 0.5 * (a + b);
        if (f(mid) > 0.0) == (fa > 0.0) {
            a = mid;
        } else {
            b = mid;
        }
    }
    0.5 * (a + b)
}

/// Multiobjective NK-landscape with one independent landscape per objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MnkInstance {
    pub m: usize,
    pub n: usize,
    pub k: usize,
    /// `neighbors[o][i]`: the `k` bits that interact with bit `i` in
    /// objective `o`.
    pub neighbors: Vec<Vec<Vec<usize>>>,
    /// `tables[o]`: `n x 2^(k+1)` contributions in [0, 1].
    pub tables: Vec<Array2<f64>>,
    pub seed: u64,
}

impl MnkInstance {
    /// Random instance. `correlation` in [0, 1) couples the tables of
    /// different objectives through a shared Gaussian component.
    pub fn generate(m: usize, n: usize, k: usize, correlation: f64, seed: u64) -> Result<Self> {
        if m < 1 {
            return Err(Error::config("m", "need at least one objective"));
        }
        if n < 1 {
            return Err(Error::config("n", "need at least one bit"));
        }
        if k >= n {
            return Err(Error::config("k", format!("need k <= n - 1 = {}, got {k}", n - 1)));
        }
        if k > 20 {
            return Err(Error::config("k", format!("table width 2^(k+1) too large for k = {k}")));
        }
        if !(0.0..1.0).contains(&correlation) {
            return Err(Error::config("correlation", format!("{correlation} outside [0, 1)")));
        }
        let root = StreamRng::new(seed, 0x6d6e6b);
        let mut neighbors = Vec::with_capacity(m);
        for o in 0..m {
            let mut gen = root.fork(o as u64).generator();
            let links: Vec<Vec<usize>> = (0..n)
                .map(|i| {
                    sample(&mut gen, n - 1, k)
                        .into_iter()
                        .map(|j| if j >= i { j + 1 } else { j })
                        .collect()
                })
                .collect();
            neighbors.push(links);
        }
        let width = 1usize << (k + 1);
        let normal = Normal::new(0.0, 1.0).expect("standard normal");
        let mut shared_gen = root.fork(u64::MAX).generator();
        let shared: Vec<f64> = (0..n * width).map(|_| gaussian(&mut shared_gen, &normal)).collect();
        let tables = (0..m)
            .map(|o| {
                let mut gen = root.fork(m as u64 + o as u64).generator();
                if correlation == 0.0 {
                    return Array2::from_shape_fn((n, width), |_| gen.random::<f64>());
                }
                let (a, b) = (correlation.sqrt(), (1.0 - correlation).sqrt());
                Array2::from_shape_fn((n, width), |(i, c)| {
                    normal.cdf(a * shared[i * width + c] + b * gaussian(&mut gen, &normal))
                })
            })
            .collect();
        Ok(Self {
            m,
            n,
            k,
            neighbors,
            tables,
            seed,
        })
    }

    /// Table column for bit `i` of objective `o`: the bit itself is the
    /// lowest digit, neighbor `t` is digit `t + 1`.
    pub fn index(&self, o: usize, i: usize, bits: ArrayView1<f64>) -> usize {
        let mut idx = (bits[i] > 0.5) as usize;
        for (t, &j) in self.neighbors[o][i].iter().enumerate() {
            idx |= ((bits[j] > 0.5) as usize) << (t + 1);
        }
        idx
    }

    pub fn evaluate_row(&self, bits: ArrayView1<f64>) -> Result<Vec<f64>> {
        if bits.len() != self.n {
            return Err(Error::shape(self.n, bits.len()));
        }
        Ok((0..self.m)
            .map(|o| -(0..self.n).map(|i| self.tables[o][[i, self.index(o, i, bits)]]).sum::<f64>() / self.n as f64)
            .collect())
    }

    pub fn evaluate(&self, x: &Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.n {
            return Err(Error::shape(self.n, x.ncols()));
        }
        let rows = x.nrows();
        let mut out = Array2::zeros((rows, self.m));
        let mut idx = vec![0usize; rows];
        for o in 0..self.m {
            let table = &self.tables[o];
            for i in 0..self.n {
                idx.iter_mut().zip(x.column(i)).for_each(|(c, &b)| *c = (b > 0.5) as usize);
                for (t, &j) in self.neighbors[o][i].iter().enumerate() {
                    idx.iter_mut()
                        .zip(x.column(j))
                        .for_each(|(c, &b)| *c |= ((b > 0.5) as usize) << (t + 1));
                }
                for (r, &c) in idx.iter().enumerate() {
                    out[[r, o]] -= table[[i, c]];
                }
            }
        }
        out /= self.n as f64;
        Ok(out)
    }
}

fn gaussian(gen: &mut impl Rng, normal: &Normal) -> f64 {
    // open interval keeps the quantile finite
    let u: f64 = gen.random_range(f64::EPSILON..1.0);
    normal.inverse_cdf(u)
}

/// 0/1 knapsack with `m` profit vectors and one capacity constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnapsackInstance {
    pub m: usize,
    pub d: usize,
    /// `m x d` integer profits.
    pub profits: Vec<Vec<u32>>,
    pub weights: Vec<u32>,
    pub capacity: u64,
    pub seed: u64,
    /// Items by ascending max-profit/weight ratio; repair removes in this
    /// order.
    removal_order: Vec<usize>,
}

impl KnapsackInstance {
    /// Profits and weights uniform in [10, 100], capacity half the total
    /// weight.
    pub fn generate(m: usize, d: usize, seed: u64) -> Result<Self> {
        if m < 1 {
            return Err(Error::config("m", "need at least one objective"));
        }
        if d < 1 {
            return Err(Error::config("d", "need at least one item"));
        }
        let root = StreamRng::new(seed, 0x6b6e6170);
        let mut gen = root.generator();
        let profits: Vec<Vec<u32>> = (0..m).map(|_| (0..d).map(|_| gen.random_range(10..=100)).collect()).collect();
        let weights: Vec<u32> = (0..d).map(|_| gen.random_range(10..=100)).collect();
        let capacity = weights.iter().map(|&w| w as u64).sum::<u64>() / 2;
        Self::from_parts(profits, weights, capacity, seed)
    }

    pub fn from_parts(profits: Vec<Vec<u32>>, weights: Vec<u32>, capacity: u64, seed: u64) -> Result<Self> {
        let m = profits.len();
        let d = weights.len();
        if m == 0 || d == 0 {
            return Err(Error::config("profits", "empty instance"));
        }
        if profits.iter().any(|p| p.len() != d) {
            return Err(Error::config("profits", "row length differs from item count"));
        }
        if profits.iter().flatten().chain(&weights).any(|&v| v == 0) {
            return Err(Error::config("profits", "profits and weights must be positive"));
        }
        if capacity == 0 {
            return Err(Error::config("capacity", "must be positive"));
        }
        let ratio = |i: usize| profits.iter().map(|p| p[i]).max().unwrap_or(0) as f64 / weights[i] as f64;
        let mut removal_order: Vec<usize> = (0..d).collect();
        removal_order.sort_by(|&a, &b| ratio(a).total_cmp(&ratio(b)).then(a.cmp(&b)));
        Ok(Self {
            m,
            d,
            profits,
            weights,
            capacity,
            seed,
            removal_order,
        })
    }

    /// Drops included items, lowest ratio first, until the weight fits.
    pub fn repair(&self, bits: &mut [f64]) {
        let mut load: u64 = (0..self.d).filter(|&i| bits[i] > 0.5).map(|i| self.weights[i] as u64).sum();
        for &i in &self.removal_order {
            if load <= self.capacity {
                break;
            }
            if bits[i] > 0.5 {
                bits[i] = 0.0;
                load -= self.weights[i] as u64;
            }
        }
    }

    /// Negated profit sums of an already feasible selection.
    pub fn objectives(&self, bits: ArrayView1<f64>) -> Vec<f64> {
        self.profits
            .iter()
            .map(|p| -(0..self.d).filter(|&i| bits[i] > 0.5).map(|i| p[i] as f64).sum::<f64>())
            .collect()
    }

    /// Repairs every row in place, then evaluates it.
    pub fn evaluate(&self, x: &mut Array2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.d {
            return Err(Error::shape(self.d, x.ncols()));
        }
        let mut out = Array2::zeros((x.nrows(), self.m));
        for (r, mut row) in x.rows_mut().into_iter().enumerate() {
            let bits = row.as_slice_mut().expect("standard layout");
            self.repair(bits);
            let f = self.objectives(row.view());
            out.row_mut(r).assign(&ArrayView1::from(&f));
        }
        Ok(out)
    }
}

/// Problem selection as it appears in a run configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemConfig {
    Dtlz2 { m: usize, d: usize },
    Dtlz3 { m: usize, d: usize },
    Dtlz5 { m: usize, d: usize },
    Dtlz7 { m: usize, d: usize },
    Mnk {
        m: usize,
        n: usize,
        k: usize,
        #[serde(default)]
        correlation: f64,
        #[serde(default)]
        instance_seed: u64,
    },
    Knapsack {
        m: usize,
        d: usize,
        #[serde(default)]
        instance_seed: u64,
    },
}

impl ProblemConfig {
    pub fn objectives(&self) -> usize {
        match *self {
            Self::Dtlz2 { m, .. }
            | Self::Dtlz3 { m, .. }
            | Self::Dtlz5 { m, .. }
            | Self::Dtlz7 { m, .. }
            | Self::Mnk { m, .. }
            | Self::Knapsack { m, .. } => m,
        }
    }

    pub fn build(&self) -> Result<Problem> {
        Ok(match *self {
            Self::Dtlz2 { m, d } => Problem::Continuous(ContinuousProblem::new(DtlzKind::Dtlz2, m, d)?),
            Self::Dtlz3 { m, d } => Problem::Continuous(ContinuousProblem::new(DtlzKind::Dtlz3, m, d)?),
            Self::Dtlz5 { m, d } => Problem::Continuous(ContinuousProblem::new(DtlzKind::Dtlz5, m, d)?),
            Self::Dtlz7 { m, d } => Problem::Continuous(ContinuousProblem::new(DtlzKind::Dtlz7, m, d)?),
            Self::Mnk {
                m,
                n,
                k,
                correlation,
                instance_seed,
            } => Problem::Mnk(MnkInstance::generate(m, n, k, correlation, instance_seed)?),
            Self::Knapsack { m, d, instance_seed } => Problem::Knapsack(KnapsackInstance::generate(m, d, instance_seed)?),
        })
    }
}

/// Parameters for a seeded discrete instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InstanceSpec {
    Mnk { m: usize, n: usize, k: usize, correlation: f64 },
    Knapsack { m: usize, d: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Instance {
    Mnk(MnkInstance),
    Knapsack(KnapsackInstance),
}

impl Instance {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instances serialize")
    }
}

pub fn generate_instance(spec: InstanceSpec, seed: u64) -> Result<Instance> {
    Ok(match spec {
        InstanceSpec::Mnk { m, n, k, correlation } => Instance::Mnk(MnkInstance::generate(m, n, k, correlation, seed)?),
        InstanceSpec::Knapsack { m, d } => Instance::Knapsack(KnapsackInstance::generate(m, d, seed)?),
    })
}

/// A built problem ready for evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum Problem {
    Continuous(ContinuousProblem),
    Mnk(MnkInstance),
    Knapsack(KnapsackInstance),
}

impl Problem {
    pub fn objectives(&self) -> usize {
        match self {
            Self::Continuous(p) => p.m,
            Self::Mnk(p) => p.m,
            Self::Knapsack(p) => p.m,
        }
    }

    pub fn variables(&self) -> usize {
        match self {
            Self::Continuous(p) => p.d,
            Self::Mnk(p) => p.n,
            Self::Knapsack(p) => p.d,
        }
    }

    pub fn is_binary(&self) -> bool {
        !matches!(self, Self::Continuous(_))
    }

    pub fn bounds(&self) -> Bounds {
        Bounds::uniform(self.variables(), 0.0, 1.0)
    }

    /// Evaluates a batch. Knapsack repair writes back into `x`.
    pub fn evaluate(&self, x: &mut Array2<f64>) -> Result<Array2<f64>> {
        match self {
            Self::Continuous(p) => p.evaluate(x),
            Self::Mnk(p) => p.evaluate(x),
            Self::Knapsack(p) => p.evaluate(x),
        }
    }

    /// Pareto-front sample, for problems with a known front.
    pub fn pf_sample(&self, count: usize) -> Result<Array2<f64>> {
        match self {
            Self::Continuous(p) => p.pf_sample(count),
            _ => Err(Error::Unsupported("no closed-form front for discrete problems".into())),
        }
    }
}
