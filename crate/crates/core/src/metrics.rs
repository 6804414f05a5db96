//! Quality indicators: IGD, hypervolume (exact up to three objectives,
//! Monte Carlo above), and hypervolume normalized over a collection of
//! fronts.

use ndarray::{Array2, ArrayView1, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::batchcore::StreamRng;
use crate::error::{Error, Result};

/// Samples used by [`hv`] when the exact sweep does not apply.
pub const MC_SAMPLES: usize = 1_000_000;
/// Seed used by [`hv`] for Monte Carlo estimates.
pub const MC_SEED: u64 = 0x4856;

/// Wall-clock seconds spent in each phase of a generation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub variation: f64,
    pub sort: f64,
    pub niche: f64,
    pub eval: f64,
}

impl PhaseTimings {
    pub fn total(&self) -> f64 {
        self.variation + self.sort + self.niche + self.eval
    }

    pub fn add(&mut self, other: &PhaseTimings) {
        self.variation += other.variation;
        self.sort += other.sort;
        self.niche += other.niche;
        self.eval += other.eval;
    }
}

/// One generation's measurements. Metric fields are `None` for
/// generations outside the metric schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRecord {
    pub generation: usize,
    pub igd: Option<f64>,
    pub hv_raw: Option<f64>,
    pub hv_normalized: Option<f64>,
    pub evaluations: usize,
    pub timings: PhaseTimings,
}

fn check_nonempty(name: &str, x: &Array2<f64>) -> Result<()> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::Parameter(format!("{name} is empty")));
    }
    Ok(())
}

/// Mean distance from each reference point to its nearest front member.
pub fn igd(front: &Array2<f64>, reference: &Array2<f64>) -> Result<f64> {
    check_nonempty("front", front)?;
    check_nonempty("reference", reference)?;
    if front.ncols() != reference.ncols() {
        return Err(Error::shape(reference.ncols(), front.ncols()));
    }
    let mut total = 0.0;
    for r in reference.rows() {
        let mut best = f64::INFINITY;
        for f in front.rows() {
            let mut s = 0.0;
            for (a, b) in r.iter().zip(f.iter()) {
                s += (a - b) * (a - b);
                if s >= best {
                    break;
                }
            }
            best = best.min(s);
        }
        total += best.sqrt();
    }
    Ok(total / reference.nrows() as f64)
}

/// Hypervolume value; `std_error` is zero for exact computations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HvEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Points strictly better than `ref_point` in every objective.
fn retained(front: &Array2<f64>, ref_point: &[f64]) -> Vec<Vec<f64>> {
    front
        .rows()
        .into_iter()
        .filter(|r| r.iter().zip(ref_point).all(|(a, b)| a < b))
        .map(|r| r.to_vec())
        .collect()
}

/// Exact for up to three objectives, otherwise Monte Carlo with
/// [`MC_SAMPLES`] samples and a fixed seed.
pub fn hv(front: &Array2<f64>, ref_point: &[f64]) -> Result<HvEstimate> {
    if front.ncols() != ref_point.len() {
        return Err(Error::shape(ref_point.len(), front.ncols()));
    }
    if ref_point.len() <= 3 {
        hv_exact(front, ref_point).map(|value| HvEstimate { value, std_error: 0.0 })
    } else {
        hv_monte_carlo(front, ref_point, MC_SAMPLES, MC_SEED)
    }
}

/// Sweep computation for one to three objectives.
pub fn hv_exact(front: &Array2<f64>, ref_point: &[f64]) -> Result<f64> {
    if front.ncols() != ref_point.len() {
        return Err(Error::shape(ref_point.len(), front.ncols()));
    }
    let pts = retained(front, ref_point);
    if pts.is_empty() {
        return Ok(0.0);
    }
    match ref_point.len() {
        1 => Ok(ref_point[0] - pts.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min)),
        2 => {
            let mut xy: Vec<(f64, f64)> = pts.iter().map(|p| (p[0], p[1])).collect();
            xy.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
            Ok(area(&xy, ref_point[0], ref_point[1]))
        }
        3 => {
            let mut pts = pts;
            pts.sort_by(|a, b| a[2].total_cmp(&b[2]));
            let mut slab: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
            let mut volume = 0.0;
            for i in 0..pts.len() {
                let p = (pts[i][0], pts[i][1]);
                let at = slab.partition_point(|q| q.0 < p.0 || (q.0 == p.0 && q.1 < p.1));
                slab.insert(at, p);
                let top = if i + 1 < pts.len() { pts[i + 1][2] } else { ref_point[2] };
                let depth = top - pts[i][2];
                if depth > 0.0 {
                    volume += area(&slab, ref_point[0], ref_point[1]) * depth;
                }
            }
            Ok(volume)
        }
        m => Err(Error::Unsupported(format!("exact hypervolume for {m} objectives"))),
    }
}

/// Dominated area of points sorted by ascending x.
fn area(sorted: &[(f64, f64)], rx: f64, ry: f64) -> f64 {
    let mut floor = ry;
    let mut a = 0.0;
    for &(x, y) in sorted {
        if y < floor {
            a += (rx - x) * (floor - y);
            floor = y;
        }
    }
    a
}

/// Uniform sampling in the box between the front's minimum and the
/// reference point.
pub fn hv_monte_carlo(front: &Array2<f64>, ref_point: &[f64], samples: usize, seed: u64) -> Result<HvEstimate> {
    if front.ncols() != ref_point.len() {
        return Err(Error::shape(ref_point.len(), front.ncols()));
    }
    if samples == 0 {
        return Err(Error::Parameter("need at least one sample".into()));
    }
    let pts = retained(front, ref_point);
    if pts.is_empty() {
        return Ok(HvEstimate { value: 0.0, std_error: 0.0 });
    }
    let m = ref_point.len();
    let low: Vec<f64> = (0..m).map(|j| pts.iter().map(|p| p[j]).fold(f64::INFINITY, f64::min)).collect();
    let span: Vec<f64> = (0..m).map(|j| ref_point[j] - low[j]).collect();
    let box_volume: f64 = span.iter().product();
    let mut gen = StreamRng::new(seed, 0x6d63).generator();
    let mut s = vec![0.0; m];
    let mut hits = 0usize;
    for _ in 0..samples {
        for j in 0..m {
            s[j] = low[j] + span[j] * gen.random::<f64>();
        }
        if pts.iter().any(|p| p.iter().zip(&s).all(|(a, b)| a <= b)) {
            hits += 1;
        }
    }
    let p = hits as f64 / samples as f64;
    Ok(HvEstimate {
        value: box_volume * p,
        std_error: box_volume * (p * (1.0 - p) / samples as f64).sqrt(),
    })
}

/// Hypervolumes of a collection of fronts against a shared box.
#[derive(Debug, Clone, PartialEq)]
pub struct NormalizedHv {
    /// `1.01 * f_max` per objective.
    pub ref_point: Vec<f64>,
    /// `0.9 * f_min` per objective.
    pub ideal: Vec<f64>,
    pub hv_max: f64,
    pub raw: Vec<f64>,
    pub normalized: Vec<f64>,
    /// Set when `hv_max` is not positive; all values are then zero.
    pub degenerate: bool,
}

/// Normalizes each front's hypervolume by the box spanned by the scaled
/// extremes of the whole collection.
///
/// The factors are applied as written, also to negative objectives. A
/// negative minimum is scaled toward zero, so for negated maximization
/// problems the box can be smaller than the front's extent and
/// normalized values can exceed one.
pub fn normalized_hv(fronts: &[Array2<f64>]) -> Result<NormalizedHv> {
    let Some(first) = fronts.first() else {
        return Err(Error::Parameter("no fronts".into()));
    };
    let m = first.ncols();
    if m == 0 {
        return Err(Error::Parameter("fronts have no objectives".into()));
    }
    if let Some(f) = fronts.iter().find(|f| f.ncols() != m) {
        return Err(Error::shape(m, f.ncols()));
    }
    let mut fmin = vec![f64::INFINITY; m];
    let mut fmax = vec![f64::NEG_INFINITY; m];
    for f in fronts {
        for row in f.rows() {
            for j in 0..m {
                fmin[j] = fmin[j].min(row[j]);
                fmax[j] = fmax[j].max(row[j]);
            }
        }
    }
    if fmin.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parameter("fronts contain no points".into()));
    }
    let ref_point: Vec<f64> = fmax.iter().map(|v| 1.01 * v).collect();
    let ideal: Vec<f64> = fmin.iter().map(|v| 0.9 * v).collect();
    let hv_max: f64 = ref_point.iter().zip(&ideal).map(|(r, i)| r - i).product();
    if !(hv_max > 0.0) || ref_point.iter().zip(&ideal).any(|(r, i)| r <= i) {
        return Ok(NormalizedHv {
            raw: vec![0.0; fronts.len()],
            normalized: vec![0.0; fronts.len()],
            ref_point,
            ideal,
            hv_max,
            degenerate: true,
        });
    }
    let raw = fronts
        .iter()
        .map(|f| hv(f, &ref_point).map(|e| e.value))
        .collect::<Result<Vec<f64>>>()?;
    let normalized = raw.iter().map(|v| v / hv_max).collect();
    Ok(NormalizedHv {
        ref_point,
        ideal,
        hv_max,
        raw,
        normalized,
        degenerate: false,
    })
}

/// Rows not dominated by any other row.
pub fn nondominated(points: &Array2<f64>) -> Array2<f64> {
    let keep: Vec<usize> = (0..points.nrows())
        .filter(|&i| {
            let a = points.row(i);
            !(0..points.nrows()).any(|j| j != i && weakly_better(points.row(j), a))
        })
        .collect();
    points.select(Axis(0), &keep)
}

fn weakly_better(a: ArrayView1<f64>, b: ArrayView1<f64>) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| x <= y) && a.iter().zip(b.iter()).any(|(x, y)| x < y)
}
