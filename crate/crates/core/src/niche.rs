//! Reference-point niche selection.
//!
//! Two selectors fill the `k` open slots from the splitting front `F_l`:
//!
//! * [`batched_select`] works on whole-population state. It shuffles the
//!   candidate order and the reference order once, fills every empty niche
//!   with its nearest candidate in a single pass, lays the remaining
//!   candidates out in a per-niche cache table, and then repeatedly serves
//!   *all* least-crowded niches at once by reading the next cache column.
//!   A batch that would overshoot `k` keeps its first niches in shuffled
//!   reference order.
//! * [`oracle_select`] is the scalar one-niche-at-a-time loop: draw a
//!   least-crowded niche uniformly at random, take its nearest candidate if
//!   the niche is empty, otherwise a uniformly random one.
//!
//! Both produce the same distribution over selected sets; the batched form
//! needs at most `k` loop iterations and usually far fewer.
//!
//! Niche counts use [`DISABLED`] as an infinite count: a niche with no
//! candidates left is never the minimum.

use std::io::Write;

use nalgebra::{DMatrix, DVector};
use ndarray::{Array2, ArrayView1};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::batchcore::{permutation, MaskedMatrix, StreamRng};
use crate::dominance::{FrontSplit, RankVector};
use crate::error::{Error, Result};
use crate::refpoints::ReferencePointSet;

/// Infinite niche count.
pub const DISABLED: usize = usize::MAX;

const ASF_EPSILON: f64 = 1e-6;
const DEGENERATE: f64 = 1e-10;

/// How the distance from an objective vector to a reference ray is formed
/// from the cosine between them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistanceForm {
    /// `|f| * sqrt(1 - cos^2)`: the true perpendicular distance.
    #[default]
    Perpendicular,
    /// `|f| * sqrt(1 - cos)`.
    UnsquaredCosine,
}

/// Which selector fills the splitting front.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    #[default]
    Batched,
    Oracle,
}

// ---------------------------------------------------------------------------
// Normalization
// ---------------------------------------------------------------------------

/// Objective normalization with an ideal point that persists across calls.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Normalizer {
    ideal: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Normalized {
    pub values: MaskedMatrix,
    pub ideal: Vec<f64>,
    pub intercepts: Vec<f64>,
}

impl Normalizer {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn ideal(&self) -> Option<&[f64]> {
        self.ideal.as_deref()
    }

    /// Folds the valid rows into the running ideal point.
    pub fn observe(&mut self, f: &MaskedMatrix) -> Result<Vec<f64>> {
        let mins = f.column_min().ok_or(Error::EmptySelection)?;
        let ideal: Vec<f64> = match &self.ideal {
            Some(prev) if prev.len() == f.cols() => prev.iter().zip(&mins).map(|(a, b)| a.min(*b)).collect(),
            _ => mins,
        };
        self.ideal = Some(ideal.clone());
        Ok(ideal)
    }

    /// Translates valid rows by the running ideal point and scales each
    /// objective by the hyperplane intercept through the extreme points.
    pub fn normalize(&mut self, f: &MaskedMatrix) -> Result<Normalized> {
        let ideal = self.observe(f)?;

        let mut translated = f.data().clone();
        for mut row in translated.rows_mut() {
            row.iter_mut().zip(&ideal).for_each(|(x, z)| *x -= z);
        }
        let translated = MaskedMatrix::new(translated, f.valid().to_vec())?;
        let intercepts = intercepts(&translated);

        let (mut data, valid) = translated.into_parts();
        for (i, mut row) in data.rows_mut().into_iter().enumerate() {
            if valid[i] {
                row.iter_mut().zip(&intercepts).for_each(|(x, a)| *x /= a);
            } else {
                row.fill(0.0);
            }
        }
        Ok(Normalized {
            values: MaskedMatrix::new(data, valid)?,
            ideal,
            intercepts,
        })
    }
}

/// Achievement scalarizing function with unit weight on `axis`.
fn asf(row: ArrayView1<f64>, axis: usize) -> f64 {
    row.iter()
        .enumerate()
        .map(|(t, &x)| if t == axis { x } else { x / ASF_EPSILON })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn intercepts(translated: &MaskedMatrix) -> Vec<f64> {
    let m = translated.cols();
    let fallback: Vec<f64> = translated
        .column_max()
        .expect("at least one valid row")
        .into_iter()
        .map(|v| if v > DEGENERATE && v.is_finite() { v } else { 1.0 })
        .collect();

    let mut extremes = Vec::with_capacity(m);
    for axis in 0..m {
        let mut best: Option<(usize, f64)> = None;
        for i in translated.valid_indices() {
            let s = asf(translated.data().row(i), axis);
            if best.is_none_or(|(_, b)| s < b) {
                best = Some((i, s));
            }
        }
        extremes.push(best.expect("valid row").0);
    }
    let mut distinct = extremes.clone();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < m {
        return fallback;
    }

    let e = DMatrix::from_fn(m, m, |r, c| translated.data()[[extremes[r], c]]);
    let Some(plane) = e.lu().solve(&DVector::from_element(m, 1.0)) else {
        return fallback;
    };
    plane
        .iter()
        .zip(&fallback)
        .map(|(&b, &fb)| {
            let a = 1.0 / b;
            if a.is_finite() && a > DEGENERATE {
                a
            } else {
                fb
            }
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Distances and association
// ---------------------------------------------------------------------------

#[inline]
fn cosine_key(dot: f64, inv_norm: f64, form: DistanceForm) -> f64 {
    let c = (dot * inv_norm).clamp(-1.0, 1.0);
    match form {
        DistanceForm::Perpendicular => c * c,
        DistanceForm::UnsquaredCosine => c,
    }
}

/// Distance as a non-increasing function of the cosine key.
#[inline]
fn distance_from_key(norm: f64, key: f64) -> f64 {
    norm * (1.0 - key).max(0.0).sqrt()
}

/// Reference directions scaled to unit length, stored objective-major
/// (`m x w`) so that a row's dot products against every direction run over
/// contiguous memory.
struct UnitRefs {
    by_objective: Vec<Vec<f64>>,
    w: usize,
}

impl UnitRefs {
    fn new(z: &Array2<f64>) -> Result<Self> {
        let (w, m) = z.dim();
        let mut by_objective = vec![vec![0.0; w]; m];
        for (j, row) in z.rows().into_iter().enumerate() {
            let norm = row.dot(&row).sqrt();
            if !(norm > 0.0) || !norm.is_finite() {
                return Err(Error::Parameter(format!("reference point {j} has zero length")));
            }
            for (t, &v) in row.iter().enumerate() {
                by_objective[t][j] = v / norm;
            }
        }
        Ok(Self { by_objective, w })
    }

    /// Row norm and its reciprocal (zero for the zero vector).
    fn row_norm(f: ArrayView1<f64>) -> (f64, f64) {
        let norm = f.iter().map(|x| x * x).sum::<f64>().sqrt();
        (norm, if norm > 0.0 { 1.0 / norm } else { 0.0 })
    }

    fn dots(&self, f: ArrayView1<f64>, out: &mut [f64]) {
        let mut cols = self.by_objective.iter().zip(f.iter());
        if let Some((z0, &f0)) = cols.next() {
            out.iter_mut().zip(z0).for_each(|(o, &z)| *o = f0 * z);
        }
        for (zt, &ft) in cols {
            out.iter_mut().zip(zt).for_each(|(o, &z)| *o += ft * z);
        }
    }
}

/// Full `rows x w` matrix of distances from each objective row to each
/// reference ray. A zero objective vector is at distance 0 from every ray.
pub fn perpendicular_distance_matrix(
    fnorm: &Array2<f64>,
    z: &ReferencePointSet,
    form: DistanceForm,
) -> Result<Array2<f64>> {
    if fnorm.ncols() != z.objectives() {
        return Err(Error::shape(z.objectives(), fnorm.ncols()));
    }
    let refs = UnitRefs::new(z.points())?;
    let mut d = Array2::zeros((fnorm.nrows(), refs.w));
    let mut dots = vec![0.0; refs.w];
    for (i, f) in fnorm.rows().into_iter().enumerate() {
        let (norm, inv) = UnitRefs::row_norm(f);
        refs.dots(f, &mut dots);
        for (j, &dot) in dots.iter().enumerate() {
            d[[i, j]] = distance_from_key(norm, cosine_key(dot, inv, form));
        }
    }
    Ok(d)
}

/// Nearest reference point per individual.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationInfo {
    /// Nearest reference index; meaningful only where `valid`.
    pub pi: Vec<usize>,
    /// Distance to that reference; meaningful only where `valid`.
    pub d: Vec<f64>,
    pub valid: Vec<bool>,
}

/// Row-wise argmin (lowest index on ties) of a distance matrix.
pub fn associate(d: &Array2<f64>, valid: &[bool]) -> AssociationInfo {
    let n = d.nrows();
    let mut pi = vec![0; n];
    let mut dist = vec![0.0; n];
    for (i, row) in d.rows().into_iter().enumerate() {
        if !valid[i] {
            continue;
        }
        let mut best = 0;
        for (j, &v) in row.iter().enumerate() {
            if v < row[best] {
                best = j;
            }
        }
        pi[i] = best;
        dist[i] = row[best];
    }
    AssociationInfo {
        pi,
        d: dist,
        valid: valid.to_vec(),
    }
}

/// Distance matrix and row argmin in one pass, without materializing the
/// matrix. Gives exactly the result of
/// `associate(&perpendicular_distance_matrix(..), valid)`.
pub fn associate_fused(fnorm: &MaskedMatrix, z: &ReferencePointSet, form: DistanceForm) -> Result<AssociationInfo> {
    if fnorm.cols() != z.objectives() {
        return Err(Error::shape(z.objectives(), fnorm.cols()));
    }
    let refs = UnitRefs::new(z.points())?;
    let n = fnorm.rows();
    let mut pi = vec![0; n];
    let mut dist = vec![0.0; n];
    let mut keys = vec![0.0; refs.w];
    for i in fnorm.valid_indices() {
        let f = fnorm.data().row(i);
        let (norm, inv) = UnitRefs::row_norm(f);
        refs.dots(f, &mut keys);
        let mut max_key = f64::NEG_INFINITY;
        for k in keys.iter_mut() {
            *k = cosine_key(*k, inv, form);
            max_key = max_key.max(*k);
        }
        // distance is non-increasing in the key, so the minimum distance is
        // attained at the maximum key; rounding can tie it with keys a few
        // ulps lower, which the second scan resolves by lowest index
        let best = distance_from_key(norm, max_key);
        let floor = max_key - 1e-12;
        let j = keys
            .iter()
            .position(|&k| k >= floor && distance_from_key(norm, k) == best)
            .expect("maximum key is present");
        pi[i] = j;
        dist[i] = best;
    }
    Ok(AssociationInfo {
        pi,
        d: dist,
        valid: fnorm.valid().to_vec(),
    })
}

// ---------------------------------------------------------------------------
// Counts, nearest selection, cache table
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NicheCounts {
    /// Selected members per niche; [`DISABLED`] once a niche has no
    /// candidates left.
    pub rho: Vec<usize>,
    /// Unconsumed candidates per niche.
    pub rho_prime: Vec<usize>,
}

impl NicheCounts {
    fn take(&mut self, j: usize) {
        self.rho[j] += 1;
        self.rho_prime[j] -= 1;
        if self.rho_prime[j] == 0 {
            self.rho[j] = DISABLED;
        }
    }

    /// Smallest finite count.
    pub fn min_active(&self) -> Option<usize> {
        self.rho.iter().copied().filter(|&c| c != DISABLED).min()
    }
}

/// Counts over selected members (`rank < l`) and candidates (`rank == l`).
pub fn niche_counts(info: &AssociationInfo, ranks: &RankVector, l: i32, w: usize) -> NicheCounts {
    let mut rho = vec![0; w];
    let mut rho_prime = vec![0; w];
    for (i, &r) in ranks.ranks().iter().enumerate() {
        if !info.valid[i] {
            continue;
        }
        if r < l {
            rho[info.pi[i]] += 1;
        } else if r == l {
            rho_prime[info.pi[i]] += 1;
        }
    }
    for (c, &p) in rho.iter_mut().zip(&rho_prime) {
        if p == 0 {
            *c = DISABLED;
        }
    }
    NicheCounts { rho, rho_prime }
}

/// Mutable state shared by the phases of batched selection.
#[derive(Debug, Clone)]
pub struct SelectionState {
    pub ranks: RankVector,
    /// Splitting front index.
    pub level: i32,
    /// Population size to reach.
    pub target: usize,
    pub counts: NicheCounts,
    /// Candidate visiting order (position -> individual).
    pub pop_order: Vec<usize>,
    /// Niche serving order (position -> reference index).
    pub ref_order: Vec<usize>,
    /// Candidate taken by nearest selection, per niche.
    pub nearest_taken: Vec<Option<usize>>,
}

impl SelectionState {
    pub fn new(
        info: &AssociationInfo,
        ranks: RankVector,
        split: &FrontSplit,
        n: usize,
        w: usize,
        pop_order: Vec<usize>,
        ref_order: Vec<usize>,
    ) -> Self {
        let level = split.l as i32;
        let counts = niche_counts(info, &ranks, level, w);
        Self {
            ranks,
            level,
            target: n,
            counts,
            pop_order,
            ref_order,
            nearest_taken: vec![None; w],
        }
    }

    pub fn selected_count(&self) -> usize {
        self.ranks.count_below(self.level)
    }

    fn promote(&mut self, x: usize) {
        self.ranks.ranks_mut()[x] = self.level - 1;
    }
}

/// Fills every empty niche that has candidates with its nearest candidate,
/// all at once. Returns how many were filled. If there are more such
/// niches than open slots, the first ones in reference order win.
pub fn nearest_selection(state: &mut SelectionState, info: &AssociationInfo) -> usize {
    let w = state.counts.rho.len();
    let mut best: Vec<Option<usize>> = vec![None; w];
    for &i in &state.pop_order {
        if state.ranks.ranks()[i] != state.level || !info.valid[i] {
            continue;
        }
        let j = info.pi[i];
        if state.counts.rho[j] != 0 {
            continue;
        }
        match best[j] {
            Some(b) if info.d[i] >= info.d[b] => {}
            _ => best[j] = Some(i),
        }
    }
    let need = state.target.saturating_sub(state.selected_count());
    let chosen: Vec<usize> = state
        .ref_order
        .iter()
        .copied()
        .filter(|&j| best[j].is_some())
        .take(need)
        .collect();
    for &j in &chosen {
        let x = best[j].expect("filtered");
        state.promote(x);
        state.counts.take(j);
        state.nearest_taken[j] = Some(x);
    }
    chosen.len()
}

/// Per-niche candidate lists, padded to a common width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheTable {
    width: usize,
    entries: Vec<usize>,
    filled: Vec<usize>,
    /// Next unread column per niche.
    pub cursor: Vec<usize>,
}

impl CacheTable {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn rows(&self) -> usize {
        self.filled.len()
    }

    /// Entry at `(j, c)`; `None` in the padding.
    pub fn get(&self, j: usize, c: usize) -> Option<usize> {
        (c < self.filled[j]).then(|| self.entries[j * self.width + c])
    }

    pub fn row(&self, j: usize) -> Vec<Option<usize>> {
        (0..self.width).map(|c| self.get(j, c)).collect()
    }

    fn next(&mut self, j: usize) -> usize {
        let x = self.get(j, self.cursor[j]).expect("cursor within row");
        self.cursor[j] += 1;
        x
    }
}

/// Lays out the candidates of each niche in visiting order. A candidate
/// already taken by nearest selection sits in column 0 with the cursor
/// past it.
pub fn build_cache(state: &SelectionState, info: &AssociationInfo) -> CacheTable {
    let w = state.counts.rho.len();
    let mut rows: Vec<Vec<usize>> = state
        .nearest_taken
        .iter()
        .map(|t| t.iter().copied().collect())
        .collect();
    for &i in &state.pop_order {
        if info.valid[i] && state.ranks.ranks()[i] == state.level {
            rows[info.pi[i]].push(i);
        }
    }
    let width = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut entries = vec![0; w * width];
    let mut filled = vec![0; w];
    for (j, row) in rows.iter().enumerate() {
        entries[j * width..j * width + row.len()].copy_from_slice(row);
        filled[j] = row.len();
    }
    let cursor = state.nearest_taken.iter().map(|t| t.is_some() as usize).collect();
    CacheTable {
        width,
        entries,
        filled,
        cursor,
    }
}

/// One iteration of the batched loop, for differential debugging.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    /// Counts before the iteration; `None` is a disabled niche.
    pub rho: Vec<Option<usize>>,
    pub rho_prime: Vec<usize>,
    /// Niches served this iteration, in serving order.
    pub marked: Vec<usize>,
    pub taken: Vec<usize>,
}

pub fn write_trace<W: Write>(records: &[TraceRecord], mut out: W) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct BatchedOptions {
    pub trace: bool,
    /// Recompute counts from scratch after each iteration and panic on any
    /// bookkeeping drift.
    pub verify: bool,
}

/// Serves all least-crowded niches per iteration until the population is
/// full. Returns the number of loop iterations.
pub fn batched_random_selection(
    state: &mut SelectionState,
    cache: &mut CacheTable,
    info: &AssociationInfo,
    options: BatchedOptions,
    trace: &mut Vec<TraceRecord>,
) -> Result<usize> {
    let mut iterations = 0;
    let mut selected = state.selected_count();
    while selected < state.target {
        let Some(min) = state.counts.min_active() else {
            return Err(Error::InfeasibleSelection {
                missing: state.target - selected,
            });
        };
        let need = state.target - selected;
        let marked: Vec<usize> = state
            .ref_order
            .iter()
            .copied()
            .filter(|&j| state.counts.rho[j] == min)
            .take(need)
            .collect();
        let before = options.trace.then(|| state.counts.clone());
        let mut taken = Vec::with_capacity(marked.len());
        for &j in &marked {
            let x = cache.next(j);
            state.promote(x);
            state.counts.take(j);
            taken.push(x);
        }
        selected += marked.len();
        if let Some(before) = before {
            trace.push(TraceRecord {
                iteration: iterations,
                rho: before.rho.iter().map(|&c| (c != DISABLED).then_some(c)).collect(),
                rho_prime: before.rho_prime,
                marked,
                taken,
            });
        }
        iterations += 1;
        if options.verify {
            verify_counts(state, cache, info);
        }
    }
    Ok(iterations)
}

fn verify_counts(state: &SelectionState, cache: &CacheTable, info: &AssociationInfo) {
    let fresh = niche_counts(info, &state.ranks, state.level, state.counts.rho.len());
    for j in 0..fresh.rho.len() {
        assert_eq!(state.counts.rho_prime[j], fresh.rho_prime[j], "rho' drift at niche {j}");
        let remaining = cache.filled[j] - cache.cursor[j];
        assert_eq!(state.counts.rho_prime[j], remaining, "cursor drift at niche {j}");
        if state.counts.rho[j] != DISABLED {
            // niches disabled from the start keep DISABLED in `fresh`; every
            // other niche must match the recount
            let recount = info
                .pi
                .iter()
                .zip(state.ranks.ranks())
                .zip(&info.valid)
                .filter(|((&p, &r), &v)| v && p == j && r < state.level)
                .count();
            assert_eq!(state.counts.rho[j], recount, "rho drift at niche {j}");
        } else {
            assert_eq!(state.counts.rho_prime[j], 0, "disabled niche {j} still has candidates");
        }
    }
}

// ---------------------------------------------------------------------------
// Entry points
// ---------------------------------------------------------------------------

/// Everything a selector needs about the merged population.
#[derive(Debug, Clone, Copy)]
pub struct NicheInput<'a> {
    /// Normalized objectives; rows beyond the splitting front are invalid.
    pub normalized: &'a MaskedMatrix,
    /// Ranks after [`split_fronts`](crate::dominance::split_fronts).
    pub ranks: &'a RankVector,
    pub split: FrontSplit,
    /// Population size to reach.
    pub n: usize,
    pub refs: &'a ReferencePointSet,
    pub form: DistanceForm,
}

#[derive(Debug, Clone)]
pub struct SelectionOutcome {
    /// Survivors are exactly the entries with rank below the split level.
    pub ranks: RankVector,
    pub level: i32,
    /// Individuals taken by nearest selection.
    pub nearest: usize,
    /// Loop iterations after nearest selection.
    pub iterations: usize,
    pub trace: Vec<TraceRecord>,
}

impl SelectionOutcome {
    pub fn selected(&self) -> Vec<usize> {
        self.ranks
            .ranks()
            .iter()
            .enumerate()
            .filter_map(|(i, &r)| (r < self.level).then_some(i))
            .collect()
    }

    pub fn selected_mask(&self) -> Vec<bool> {
        self.ranks.ranks().iter().map(|&r| r < self.level).collect()
    }
}

/// Batched niche selection. The two shuffles (candidate order, reference
/// order) are the only random draws.
pub fn batched_select(input: NicheInput, rng: &StreamRng, options: BatchedOptions) -> Result<SelectionOutcome> {
    let info = associate_fused(input.normalized, input.refs, input.form)?;
    let w = input.refs.len();
    let pop_order = permutation(input.ranks.len(), &rng.fork(0));
    let ref_order = permutation(w, &rng.fork(1));
    let mut state = SelectionState::new(&info, input.ranks.clone(), &input.split, input.n, w, pop_order, ref_order);

    let nearest = nearest_selection(&mut state, &info);
    let mut trace = Vec::new();
    let mut iterations = 0;
    if state.selected_count() < state.target {
        let mut cache = build_cache(&state, &info);
        iterations = batched_random_selection(&mut state, &mut cache, &info, options, &mut trace)?;
    }
    Ok(SelectionOutcome {
        level: state.level,
        ranks: state.ranks,
        nearest,
        iterations,
        trace,
    })
}

/// Textbook scalar distance: cosine from freshly computed norms.
fn scalar_distance(f: ArrayView1<f64>, z: ArrayView1<f64>, form: DistanceForm) -> f64 {
    let mut dot = 0.0;
    let mut ff = 0.0;
    let mut zz = 0.0;
    for (&a, &b) in f.iter().zip(z.iter()) {
        dot += a * b;
        ff += a * a;
        zz += b * b;
    }
    let (fnorm, znorm) = (ff.sqrt(), zz.sqrt());
    if fnorm == 0.0 {
        return 0.0;
    }
    let c = (dot / (fnorm * znorm)).clamp(-1.0, 1.0);
    let key = match form {
        DistanceForm::Perpendicular => c * c,
        DistanceForm::UnsquaredCosine => c,
    };
    fnorm * (1.0 - key).max(0.0).sqrt()
}

/// One-at-a-time niche selection with per-step random draws.
pub fn oracle_select(input: NicheInput, rng: &StreamRng) -> Result<SelectionOutcome> {
    let z = input.refs.points();
    let w = z.nrows();
    if z.rows().into_iter().any(|r| r.iter().all(|&v| v == 0.0)) {
        return Err(Error::Parameter("zero reference point".into()));
    }
    let level = input.split.l as i32;
    let mut ranks = input.ranks.clone();
    let rows = input.normalized.rows();

    let mut pi = vec![usize::MAX; rows];
    let mut dist = vec![f64::INFINITY; rows];
    for i in 0..rows {
        if !input.normalized.is_valid(i) || ranks.ranks()[i] > level {
            continue;
        }
        let f = input.normalized.data().row(i);
        for j in 0..w {
            let d = scalar_distance(f, z.row(j), input.form);
            if d < dist[i] {
                dist[i] = d;
                pi[i] = j;
            }
        }
    }

    let mut rho = vec![0usize; w];
    let mut rho_prime = vec![0usize; w];
    let mut selected = 0;
    for i in 0..rows {
        if pi[i] == usize::MAX {
            continue;
        }
        if ranks.ranks()[i] < level {
            rho[pi[i]] += 1;
        } else {
            rho_prime[pi[i]] += 1;
        }
    }
    selected += ranks.count_below(level);

    let mut gen = rng.generator();
    let mut active = vec![true; w];
    let mut iterations = 0;
    while selected < input.n {
        let Some(min) = (0..w).filter(|&j| active[j]).map(|j| rho[j]).min() else {
            return Err(Error::InfeasibleSelection {
                missing: input.n - selected,
            });
        };
        let ties: Vec<usize> = (0..w).filter(|&j| active[j] && rho[j] == min).collect();
        let v = ties[gen.random_range(0..ties.len())];
        iterations += 1;
        if rho_prime[v] == 0 {
            active[v] = false;
            continue;
        }
        let candidates: Vec<usize> = (0..rows)
            .filter(|&i| pi[i] == v && ranks.ranks()[i] == level)
            .collect();
        let t = if rho[v] == 0 {
            let best = candidates.iter().map(|&i| dist[i]).fold(f64::INFINITY, f64::min);
            let nearest: Vec<usize> = candidates.iter().copied().filter(|&i| dist[i] == best).collect();
            nearest[gen.random_range(0..nearest.len())]
        } else {
            candidates[gen.random_range(0..candidates.len())]
        };
        ranks.ranks_mut()[t] = level - 1;
        rho[v] += 1;
        rho_prime[v] -= 1;
        selected += 1;
    }
    Ok(SelectionOutcome {
        ranks,
        level,
        nearest: 0,
        iterations,
        trace: Vec::new(),
    })
}

/// Dispatches to the chosen selector.
pub fn select(backend: Backend, input: NicheInput, rng: &StreamRng) -> Result<SelectionOutcome> {
    match backend {
        Backend::Batched => batched_select(input, rng, BatchedOptions::default()),
        Backend::Oracle => oracle_select(input, rng),
    }
}
