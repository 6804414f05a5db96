//! Fixed-shape masked batch primitives.
//!
//! Every population-level quantity in the crate is a matrix whose shape never
//! changes during a generation. Slots that hold no individual are marked
//! invalid in a boolean mask and are skipped by every reduction here; the
//! value stored in an invalid slot is irrelevant and never inspected.

use ndarray::{Array2, ArrayView1, Axis};
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Row-major real matrix with a per-row validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskedMatrix {
    data: Array2<f64>,
    valid: Vec<bool>,
}

impl MaskedMatrix {
    pub fn new(data: Array2<f64>, valid: Vec<bool>) -> Result<Self> {
        if valid.len() != data.nrows() {
            return Err(Error::shape(
                format!("{} mask flags", data.nrows()),
                valid.len(),
            ));
        }
        Ok(Self { data, valid })
    }

    /// Every row valid.
    pub fn full(data: Array2<f64>) -> Self {
        let valid = vec![true; data.nrows()];
        Self { data, valid }
    }

    /// A `rows x cols` matrix with every slot invalid.
    pub fn empty(rows: usize, cols: usize) -> Self {
        Self {
            data: Array2::zeros((rows, cols)),
            valid: vec![false; rows],
        }
    }

    pub fn rows(&self) -> usize {
        self.data.nrows()
    }

    pub fn cols(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &Array2<f64> {
        &self.data
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn is_valid(&self, row: usize) -> bool {
        self.valid[row]
    }

    pub fn valid_count(&self) -> usize {
        self.valid.iter().filter(|&&v| v).count()
    }

    /// The row's values, or `None` for an invalid slot.
    pub fn row(&self, row: usize) -> Option<ArrayView1<'_, f64>> {
        self.valid[row].then(|| self.data.row(row))
    }

    pub fn set_row(&mut self, row: usize, values: &[f64]) -> Result<()> {
        if values.len() != self.cols() {
            return Err(Error::shape(self.cols(), values.len()));
        }
        self.data
            .row_mut(row)
            .iter_mut()
            .zip(values)
            .for_each(|(dst, &src)| *dst = src);
        self.valid[row] = true;
        Ok(())
    }

    pub fn invalidate(&mut self, row: usize) {
        self.valid[row] = false;
    }

    /// Valid rows only, in slot order.
    pub fn compact(&self) -> Array2<f64> {
        let keep: Vec<usize> = self.valid_indices().collect();
        self.data.select(Axis(0), &keep)
    }

    pub fn valid_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.valid
            .iter()
            .enumerate()
            .filter_map(|(i, &v)| v.then_some(i))
    }

    /// Column-wise minimum over valid rows; `None` when no row is valid.
    pub fn column_min(&self) -> Option<Vec<f64>> {
        self.column_fold(f64::INFINITY, f64::min)
    }

    /// Column-wise maximum over valid rows; `None` when no row is valid.
    pub fn column_max(&self) -> Option<Vec<f64>> {
        self.column_fold(f64::NEG_INFINITY, f64::max)
    }

    fn column_fold(&self, init: f64, f: impl Fn(f64, f64) -> f64) -> Option<Vec<f64>> {
        let mut acc = vec![init; self.cols()];
        let mut any = false;
        for i in self.valid_indices() {
            any = true;
            for (a, &x) in acc.iter_mut().zip(self.data.row(i)) {
                *a = f(*a, x);
            }
        }
        any.then_some(acc)
    }

    pub fn into_parts(self) -> (Array2<f64>, Vec<bool>) {
        (self.data, self.valid)
    }
}

/// Counter-based random source.
///
/// The value drawn at `(seed, stream, index)` is a pure function of the three
/// arguments, so per-slot draws can be taken in any order (or in parallel)
/// and still reproduce bit-for-bit. Sequential consumers call
/// [`StreamRng::generator`], which starts at index 0 of the stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StreamRng {
    seed: u64,
    stream: u64,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        Self { seed, stream }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// An independent child stream identified by `label`.
    pub fn fork(&self, label: u64) -> Self {
        Self {
            seed: self.seed,
            stream: splitmix64(self.stream ^ splitmix64(label.wrapping_add(0x5851_f42d_4c95_7f2d))),
        }
    }

    pub fn generator(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    pub fn u64_at(&self, index: u64) -> u64 {
        let mut rng = self.generator();
        rng.set_word_pos(u128::from(index) * 2);
        rng.next_u64()
    }

    /// Uniform draw in `[0, 1)` at `index`.
    pub fn uniform_at(&self, index: u64) -> f64 {
        (self.u64_at(index) >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Heaviside step: `x > 0`.
pub fn step_mask(x: &[f64]) -> Vec<bool> {
    x.iter().map(|&v| v > 0.0).collect()
}

/// Index of the smallest value among valid slots. Ties go to the lowest
/// index; NaN compares greater than every number.
pub fn masked_argmin(values: &[f64], valid: &[bool]) -> Result<usize> {
    if values.len() != valid.len() {
        return Err(Error::shape(values.len(), valid.len()));
    }
    let key = |v: f64| if v.is_nan() { f64::INFINITY } else { v };
    let mut best: Option<(usize, f64)> = None;
    for (i, (&v, &ok)) in values.iter().zip(valid).enumerate() {
        if !ok {
            continue;
        }
        match best {
            Some((_, b)) if key(v) >= b => {}
            _ => best = Some((i, key(v))),
        }
    }
    best.map(|(i, _)| i).ok_or(Error::EmptySelection)
}

/// Histogram of valid labels over `segments` bins.
pub fn segment_count(labels: &[usize], valid: &[bool], segments: usize) -> Result<Vec<usize>> {
    if labels.len() != valid.len() {
        return Err(Error::shape(labels.len(), valid.len()));
    }
    let mut counts = vec![0usize; segments];
    for (&label, _) in labels.iter().zip(valid).filter(|(_, &ok)| ok) {
        *counts
            .get_mut(label)
            .ok_or(Error::LabelOutOfRange { label, segments })? += 1;
    }
    Ok(counts)
}

/// Uniformly random permutation of `0..len` (Fisher-Yates).
pub fn permutation(len: usize, rng: &StreamRng) -> Vec<usize> {
    use rand::Rng;
    let mut gen = rng.generator();
    let mut perm: Vec<usize> = (0..len).collect();
    for i in (1..len).rev() {
        let j = gen.random_range(0..=i);
        perm.swap(i, j);
    }
    perm
}

/// Rows permuted uniformly at random. The returned permutation maps a new
/// row index to the old one.
pub fn shuffle_rows(m: &MaskedMatrix, rng: &StreamRng) -> (MaskedMatrix, Vec<usize>) {
    let perm = permutation(m.rows(), rng);
    let data = m.data.select(Axis(0), &perm);
    let valid = perm.iter().map(|&old| m.valid[old]).collect();
    (MaskedMatrix { data, valid }, perm)
}
