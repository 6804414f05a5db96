//! Pareto dominance and batched non-dominated sorting.
//!
//! Sorting builds the full pairwise dominance relation as a packed bit matrix
//! and then peels fronts off it: front 0 is every valid row with no valid
//! dominator, and each subsequent front is what becomes undominated once the
//! previous fronts are removed.

use crate::batchcore::MaskedMatrix;
use crate::error::{Error, Result};

/// `true` iff `a` is no worse than `b` everywhere and strictly better
/// somewhere (minimization).
pub fn dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::shape(a.len(), b.len()));
    }
    Ok(dominates_unchecked(a, b))
}

#[inline]
fn dominates_unchecked(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (&x, &y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        strict |= x < y;
    }
    strict
}

/// Square boolean matrix packed 64 bits per word; `get(i, j)` is
/// "row i dominates row j".
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DominanceMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl DominanceMatrix {
    fn zeros(n: usize) -> Self {
        let words = n.div_ceil(64);
        Self {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        self.bits[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    fn set(&mut self, i: usize, j: usize) {
        self.bits[i * self.words + j / 64] |= 1 << (j % 64);
    }

    /// Columns set in row `i`: the rows that `i` dominates.
    pub fn dominated_by(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let row = &self.bits[i * self.words..(i + 1) * self.words];
        row.iter().enumerate().flat_map(|(w, &word)| {
            let mut word = word;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let bit = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(w * 64 + bit)
            })
        })
    }
}

/// Pairwise dominance over valid rows; invalid rows neither dominate nor
/// are dominated.
pub fn dominance_matrix(f: &MaskedMatrix) -> DominanceMatrix {
    dominance_with_counts(f).0
}

fn dominance_with_counts(f: &MaskedMatrix) -> (DominanceMatrix, Vec<usize>) {
    let n = f.rows();
    let m = f.cols();
    let data = f.data().as_standard_layout();
    let flat = data.as_slice().expect("standard layout");
    let valid = f.valid();
    let mut matrix = DominanceMatrix::zeros(n);
    let mut dominators = vec![0usize; n];
    for i in 0..n {
        if !valid[i] {
            continue;
        }
        let a = &flat[i * m..(i + 1) * m];
        for j in (i + 1)..n {
            if !valid[j] {
                continue;
            }
            let b = &flat[j * m..(j + 1) * m];
            let (mut less, mut greater) = (false, false);
            for (&x, &y) in a.iter().zip(b) {
                less |= x < y;
                greater |= x > y;
            }
            if less && !greater {
                matrix.set(i, j);
                dominators[j] += 1;
            } else if greater && !less {
                matrix.set(j, i);
                dominators[i] += 1;
            }
        }
    }
    (matrix, dominators)
}

#[inline(always)]
fn lane_mask(chunk: &[f64; 64], pred: impl Fn(f64) -> bool) -> u64 {
    let mut word = 0u64;
    for (k, &b) in chunk.iter().enumerate() {
        word |= (pred(b) as u64) << k;
    }
    word
}

/// Marker for individuals beyond the splitting front (and invalid slots).
pub const DROPPED: i32 = i32::MAX;

/// Front index per individual, 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankVector {
    ranks: Vec<i32>,
}

impl RankVector {
    pub fn from_ranks(ranks: Vec<i32>) -> Self {
        Self { ranks }
    }

    pub fn ranks(&self) -> &[i32] {
        &self.ranks
    }

    pub fn ranks_mut(&mut self) -> &mut [i32] {
        &mut self.ranks
    }

    pub fn len(&self) -> usize {
        self.ranks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranks.is_empty()
    }

    /// Sizes of fronts 0, 1, ... (dropped entries excluded).
    pub fn front_sizes(&self) -> Vec<usize> {
        let mut sizes = Vec::new();
        for &r in self.ranks.iter().filter(|&&r| r != DROPPED && r >= 0) {
            let r = r as usize;
            if sizes.len() <= r {
                sizes.resize(r + 1, 0);
            }
            sizes[r] += 1;
        }
        sizes
    }

    pub fn count_below(&self, level: i32) -> usize {
        self.ranks.iter().filter(|&&r| r < level).count()
    }

    pub fn members(&self, level: i32) -> impl Iterator<Item = usize> + '_ {
        self.ranks
            .iter()
            .enumerate()
            .filter_map(move |(i, &r)| (r == level).then_some(i))
    }
}

/// Front ranks by iterative peeling of the dominance matrix. Invalid rows
/// get [`DROPPED`].
///
/// Rows are first put in lexicographic order, where a row can only be
/// dominated by rows before it, so each pair needs one one-sided check.
pub fn non_dominated_sort(f: &MaskedMatrix) -> RankVector {
    let m = f.cols();
    let data = f.data();
    let mut order: Vec<usize> = f.valid_indices().collect();
    order.sort_by(|&a, &b| {
        let (ra, rb) = (data.row(a), data.row(b));
        ra.iter()
            .zip(rb.iter())
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let nv = order.len();
    let mut matrix = DominanceMatrix::zeros(nv);
    // column-major copy padded with NaN, which compares false
    let padded = matrix.words * 64;
    let columns: Vec<Vec<f64>> = (0..m)
        .map(|t| {
            let mut c: Vec<f64> = order.iter().map(|&i| data[[i, t]]).collect();
            c.resize(padded, f64::NAN);
            c
        })
        .collect();
    let mut dominators = vec![0usize; nv];
    for i in 0..nv {
        for w in (i + 1) / 64..matrix.words {
            let mut le = u64::MAX;
            let mut lt = 0u64;
            for col in &columns {
                let a = col[i];
                let chunk: &[f64; 64] = col[w * 64..w * 64 + 64].try_into().expect("64 lanes");
                le &= lane_mask(chunk, |b| a <= b);
                lt |= lane_mask(chunk, |b| a < b);
            }
            let mut dom = le & lt;
            if w == i / 64 {
                dom &= (u64::MAX << (i % 64)) << 1;
            }
            matrix.bits[i * matrix.words + w] = dom;
            while dom != 0 {
                dominators[w * 64 + dom.trailing_zeros() as usize] += 1;
                dom &= dom - 1;
            }
        }
    }

    let mut ranks = vec![DROPPED; f.rows()];
    let mut current: Vec<usize> = (0..nv).filter(|&i| dominators[i] == 0).collect();
    let mut level = 0;
    while !current.is_empty() {
        let mut next = Vec::new();
        for &i in &current {
            ranks[order[i]] = level;
        }
        for &i in &current {
            for j in matrix.dominated_by(i) {
                dominators[j] -= 1;
                if dominators[j] == 0 {
                    next.push(j);
                }
            }
        }
        current = next;
        level += 1;
    }
    RankVector { ranks }
}

/// Where the next population is cut.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrontSplit {
    /// Index of the splitting front.
    pub l: usize,
    /// Members of fronts before `l`.
    pub selected_count: usize,
    /// Slots to fill from front `l`.
    pub k: usize,
    /// Members of front `l`.
    pub front_size: usize,
}

impl FrontSplit {
    /// The splitting front fits exactly; no niche choice is needed.
    pub fn is_exact(&self) -> bool {
        self.k == self.front_size
    }
}

/// Locates the splitting front for a population of `n` and marks every
/// later front as dropped.
pub fn split_fronts(r: &mut RankVector, n: usize) -> Result<FrontSplit> {
    let sizes = r.front_sizes();
    let valid: usize = sizes.iter().sum();
    if valid < n || n == 0 {
        return Err(Error::InfeasibleSplit { valid, n });
    }
    let mut cumulative = 0;
    let mut split = None;
    for (l, &size) in sizes.iter().enumerate() {
        if cumulative + size >= n {
            split = Some(FrontSplit {
                l,
                selected_count: cumulative,
                k: n - cumulative,
                front_size: size,
            });
            break;
        }
        cumulative += size;
    }
    let split = split.expect("valid >= n guarantees a split");
    for rank in r.ranks.iter_mut() {
        if *rank != DROPPED && *rank > split.l as i32 {
            *rank = DROPPED;
        }
    }
    Ok(split)
}
