//! Reference directions on the unit simplex (Das-Dennis lattice).

use std::collections::HashSet;
use std::io::Write;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lattice parameters used to build a reference set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "layout")]
pub enum Divisions {
    Single { h: usize },
    TwoLayer { outer: usize, inner: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePointSet {
    points: Array2<f64>,
    divisions: Option<Divisions>,
}

impl ReferencePointSet {
    pub fn build(m: usize, divisions: Divisions) -> Result<Self> {
        match divisions {
            Divisions::Single { h } => das_dennis(m, h),
            Divisions::TwoLayer { outer, inner } => two_layer(m, outer, inner),
        }
    }

    /// Wraps an arbitrary set of directions, one per row. Rows must be
    /// finite and non-negative.
    pub fn from_points(points: Array2<f64>) -> Result<Self> {
        if points.nrows() == 0 || points.ncols() < 2 {
            return Err(Error::Parameter(format!(
                "need at least one direction in two or more objectives, got {}x{}",
                points.nrows(),
                points.ncols()
            )));
        }
        if points.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::Parameter("directions must be finite and non-negative".into()));
        }
        Ok(Self { points, divisions: None })
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    /// Lattice parameters, or `None` for a set built from explicit points.
    pub fn divisions(&self) -> Option<Divisions> {
        self.divisions
    }

    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn objectives(&self) -> usize {
        self.points.ncols()
    }

    /// One point per line, comma separated.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for row in self.points.rows() {
            let line: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
            writeln!(out, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// `C(h + m - 1, m - 1)`, saturating at `u128::MAX`.
pub fn lattice_size(m: usize, h: usize) -> u128 {
    let k = (m - 1).min(h) as u128;
    let n = (h + m - 1) as u128;
    let mut acc: u128 = 1;
    for i in 0..k {
        // acc * (n - i) / (i + 1) stays integral at every step
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    acc
}

fn check_params(m: usize, h: usize) -> Result<()> {
    if m < 2 {
        return Err(Error::Parameter(format!("need at least 2 objectives, got {m}")));
    }
    if h < 1 {
        return Err(Error::Parameter("divisions must be at least 1".into()));
    }
    Ok(())
}

fn lattice(m: usize, h: usize) -> Vec<Vec<usize>> {
    fn recurse(m: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == m - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for i in 0..=left {
            prefix.push(i);
            recurse(m, left - i, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    recurse(m, h, &mut Vec::with_capacity(m), &mut out);
    out
}

/// All points `(i_1/h, ..., i_m/h)` with nonnegative integers summing to `h`.
pub fn das_dennis(m: usize, h: usize) -> Result<ReferencePointSet> {
    check_params(m, h)?;
    let rows = lattice(m, h);
    let flat: Vec<f64> = rows
        .iter()
        .flat_map(|r| r.iter().map(|&i| i as f64 / h as f64))
        .collect();
    Ok(ReferencePointSet {
        points: Array2::from_shape_vec((rows.len(), m), flat).expect("lattice shape"),
        divisions: Some(Divisions::Single { h }),
    })
}

/// Outer lattice plus an inner lattice shrunk halfway toward the centroid.
/// `inner = 0` means no inner layer.
pub fn two_layer(m: usize, outer: usize, inner: usize) -> Result<ReferencePointSet> {
    check_params(m, outer)?;
    let outer_set = das_dennis(m, outer)?;
    let mut rows: Vec<Vec<f64>> = outer_set.points.rows().into_iter().map(|r| r.to_vec()).collect();
    if inner > 0 {
        let shrink = 1.0 / (2.0 * m as f64);
        let mut seen: HashSet<Vec<i64>> = rows.iter().map(|r| key(r)).collect();
        for p in das_dennis(m, inner)?.points.rows() {
            let q: Vec<f64> = p.iter().map(|&x| x / 2.0 + shrink).collect();
            if seen.insert(key(&q)) {
                rows.push(q);
            }
        }
    }
    let n = rows.len();
    Ok(ReferencePointSet {
        points: Array2::from_shape_vec((n, m), rows.into_iter().flatten().collect()).expect("shape"),
        divisions: Some(Divisions::TwoLayer { outer, inner }),
    })
}

fn key(p: &[f64]) -> Vec<i64> {
    p.iter().map(|&x| (x * 1e9).round() as i64).collect()
}

fn two_layer_size(m: usize, outer: usize, inner: usize) -> u128 {
    let base = lattice_size(m, outer);
    if inner == 0 {
        return base;
    }
    let extra = lattice_size(m, inner);
    if base == u128::MAX || extra == u128::MAX {
        return u128::MAX;
    }
    // Shrunk inner points can coincide with outer lattice points; only
    // materialize when the total is small enough to matter.
    if base + extra < 1 << 20 {
        two_layer(m, outer, inner).map(|s| s.len() as u128).unwrap_or(u128::MAX)
    } else {
        base + extra
    }
}

/// Lattice parameters giving the most reference points not exceeding
/// `n_target`. Single layer for `m <= 5`, two layers above.
pub fn choose_divisions(m: usize, n_target: usize) -> Result<Divisions> {
    if m < 2 {
        return Err(Error::Parameter(format!("need at least 2 objectives, got {m}")));
    }
    if n_target < m {
        return Err(Error::Parameter(format!(
            "population {n_target} smaller than objective count {m}"
        )));
    }
    let target = n_target as u128;
    if m <= 5 {
        let mut h = 1;
        while lattice_size(m, h + 1) <= target {
            h += 1;
        }
        return Ok(Divisions::Single { h });
    }
    let mut best = (lattice_size(m, 1), 1, 0);
    let mut outer = 1;
    while lattice_size(m, outer) <= target {
        for inner in 0..=outer {
            let size = two_layer_size(m, outer, inner);
            if size > target {
                break;
            }
            if size > best.0 || (size == best.0 && outer > best.1) {
                best = (size, outer, inner);
            }
        }
        outer += 1;
    }
    Ok(Divisions::TwoLayer {
        outer: best.1,
        inner: best.2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sorted_rows(set: &ReferencePointSet) -> Vec<Vec<f64>> {
        let mut rows: Vec<Vec<f64>> = set.points().rows().into_iter().map(|r| r.to_vec()).collect();
        rows.sort_by(|a, b| a.partial_cmp(b).unwrap());
        rows
    }

    fn assert_simplex(set: &ReferencePointSet) {
        for row in set.points().rows() {
            assert!(row.iter().all(|&x| x >= 0.0));
            assert!((row.sum() - 1.0).abs() < 1e-12, "{row}");
        }
        let keys: HashSet<Vec<i64>> = set.points().rows().into_iter().map(|r| key(r.as_slice().unwrap())).collect();
        assert_eq!(keys.len(), set.len(), "rows must be distinct");
    }

    #[test]
    fn two_objectives_four_divisions() {
        let set = das_dennis(2, 4).unwrap();
        assert_eq!(
            sorted_rows(&set),
            vec![
                vec![0.0, 1.0],
                vec![0.25, 0.75],
                vec![0.5, 0.5],
                vec![0.75, 0.25],
                vec![1.0, 0.0]
            ]
        );
    }

    #[test]
    fn single_division_gives_unit_vectors() {
        let set = das_dennis(3, 1).unwrap();
        assert_eq!(
            sorted_rows(&set),
            vec![vec![0.0, 0.0, 1.0], vec![0.0, 1.0, 0.0], vec![1.0, 0.0, 0.0]]
        );
    }

    #[test]
    fn count_for_three_objectives_twelve_divisions() {
        let set = das_dennis(3, 12).unwrap();
        assert_eq!(set.len(), 91);
        assert_simplex(&set);
    }

    #[test]
    fn parameter_errors() {
        assert!(das_dennis(1, 3).is_err());
        assert!(das_dennis(3, 0).is_err());
        assert!(two_layer(3, 0, 1).is_err());
    }

    /// Brute force: every vector in {0..h}^m with sum h.
    fn enumerate_count(m: usize, h: usize) -> usize {
        let mut count = 0;
        let mut digits = vec![0usize; m];
        loop {
            if digits.iter().sum::<usize>() == h {
                count += 1;
            }
            let mut i = 0;
            loop {
                if i == m {
                    return count;
                }
                digits[i] += 1;
                if digits[i] <= h {
                    break;
                }
                digits[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn lattice_count_matches_enumeration() {
        for m in 2..=6 {
            for h in 1..=12 {
                if (h + 1usize).pow(m as u32) > 3_000_000 {
                    continue;
                }
                let expected = enumerate_count(m, h);
                assert_eq!(lattice_size(m, h), expected as u128, "m={m} h={h}");
                assert_eq!(das_dennis(m, h).unwrap().len(), expected);
            }
        }
        assert_eq!(lattice_size(6, 12), 6188);
        assert_eq!(das_dennis(6, 12).unwrap().len(), 6188);
    }

    #[test]
    fn two_layer_examples() {
        let set = two_layer(3, 1, 0).unwrap();
        assert_eq!(set.len(), 3);
        assert_simplex(&set);

        let set = two_layer(3, 2, 1).unwrap();
        assert_eq!(set.len(), 9);
        assert_simplex(&set);
        let shrunk = [2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0];
        assert!(set
            .points()
            .rows()
            .into_iter()
            .any(|r| r.iter().zip(shrunk).all(|(a, b)| (a - b).abs() < 1e-15)));
    }

    #[test]
    fn two_layer_drops_duplicates() {
        // centroid of the inner lattice lands on the outer lattice's centroid
        let set = two_layer(3, 3, 3).unwrap();
        assert_eq!(set.len(), 10 + 10 - 1);
        assert_simplex(&set);
    }

    #[test]
    fn choose_divisions_examples() {
        assert_eq!(choose_divisions(3, 91), Ok(Divisions::Single { h: 12 }));
        assert_eq!(choose_divisions(2, 100), Ok(Divisions::Single { h: 99 }));
        assert_eq!(das_dennis(2, 99).unwrap().len(), 100);
    }

    #[test]
    fn choose_divisions_six_objectives_matches_brute_force() {
        let got = choose_divisions(6, 132).unwrap();
        let mut best = 0;
        for outer in 1..=6 {
            for inner in 0..=outer {
                let size = two_layer(6, outer, inner).unwrap().len();
                if size <= 132 {
                    best = best.max(size);
                }
            }
        }
        let set = ReferencePointSet::build(6, got).unwrap();
        assert_eq!(set.len(), best);
        assert_eq!(best, 132);
        assert_simplex(&set);
    }

    #[test]
    fn chosen_size_is_bracketed() {
        for m in 2..=8 {
            for n in [m, m + 1, 20, 50, 92, 200, 500] {
                if n < m {
                    continue;
                }
                let d = choose_divisions(m, n).unwrap();
                let w = ReferencePointSet::build(m, d).unwrap().len();
                assert!(w <= n && w >= m, "m={m} n={n} w={w}");
            }
        }
    }

    #[test]
    fn csv_export() {
        let mut buf = Vec::new();
        das_dennis(2, 2).unwrap().write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "0,1\n0.5,0.5\n1,0\n");
    }
}
