//! Dynamic Time Warping over planar point sequences.
//!
//! Steps are the usual three moves (advance `i`, `j`, or both) without
//! weights, and the local cost is Euclidean distance. Path indices are
//! zero-based.

use crate::error::{Error, Result};
use crate::geo::Point2;

/// Monotone, continuous alignment from `(0, 0)` to `(|X|-1, |Y|-1)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WarpPath(pub Vec<(usize, usize)>);

impl WarpPath {
    pub fn steps(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn is_valid(&self, n: usize, m: usize) -> bool {
        let s = &self.0;
        if s.first() != Some(&(0, 0)) || s.last() != Some(&(n.wrapping_sub(1), m.wrapping_sub(1))) {
            return false;
        }
        s.windows(2).all(|w| {
            let (di, dj) = (w[1].0.wrapping_sub(w[0].0), w[1].1.wrapping_sub(w[0].1));
            matches!((di, dj), (1, 0) | (0, 1) | (1, 1))
        })
    }

    /// Sum of local costs along the path.
    pub fn cost(&self, x: &[Point2], y: &[Point2]) -> f64 {
        self.0.iter().map(|&(i, j)| x[i].distance(&y[j])).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DtwResult {
    pub distance: f64,
    pub path: WarpPath,
}

/// Full `O(|X|·|Y|)` dynamic program.
pub fn dtw_exact(x: &[Point2], y: &[Point2]) -> Result<DtwResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(windowed(x, y, &Window::full(x.len(), y.len())))
}

/// Exact DTW distance without path recovery, in `O(|Y|)` memory.
pub fn dtw_distance(x: &[Point2], y: &[Point2]) -> Result<f64> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySequence);
    }
    let m = y.len();
    let mut prev = vec![f64::INFINITY; m];
    let mut cur = vec![f64::INFINITY; m];
    for (i, xi) in x.iter().enumerate() {
        for j in 0..m {
            let d = xi.distance(&y[j]);
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let mut b = f64::INFINITY;
                if i > 0 {
                    b = b.min(prev[j]);
                    if j > 0 {
                        b = b.min(prev[j - 1]);
                    }
                }
                if j > 0 {
                    b = b.min(cur[j - 1]);
                }
                b
            };
            cur[j] = d + best;
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    Ok(prev[m - 1])
}

/// FastDTW: coarsen both series by half, solve recursively, project the
/// coarse path back and refine inside a window widened by `radius`.
///
/// `radius: None` leaves the window unconstrained, which is the full dynamic
/// program. Any radius of at least `max(|X|, |Y|)` gives the same result.
pub fn dtw_fast(x: &[Point2], y: &[Point2], radius: Option<usize>) -> Result<DtwResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySequence);
    }
    Ok(match radius {
        None => windowed(x, y, &Window::full(x.len(), y.len())),
        Some(r) => fast(x, y, r),
    })
}

fn fast(x: &[Point2], y: &[Point2], radius: usize) -> DtwResult {
    let min_size = radius.saturating_add(2);
    if x.len() < min_size || y.len() < min_size {
        return windowed(x, y, &Window::full(x.len(), y.len()));
    }
    let coarse = fast(&reduce_by_half(x), &reduce_by_half(y), radius);
    let window = Window::expand(&coarse.path, x.len(), y.len(), radius);
    windowed(x, y, &window)
}

fn reduce_by_half(x: &[Point2]) -> Vec<Point2> {
    x.chunks_exact(2)
        .map(|c| Point2::new((c[0].x + c[1].x) / 2.0, (c[0].y + c[1].y) / 2.0))
        .collect()
}

/// Per-row inclusive column ranges of the search window.
struct Window {
    lo: Vec<usize>,
    hi: Vec<usize>,
}

impl Window {
    fn full(n: usize, m: usize) -> Self {
        Self {
            lo: vec![0; n],
            hi: vec![m - 1; n],
        }
    }

    fn expand(coarse: &WarpPath, n: usize, m: usize, radius: usize) -> Self {
        let mut lo = vec![usize::MAX; n];
        let mut hi = vec![0usize; n];
        let r = radius as i64;
        for &(ci, cj) in coarse.steps() {
            let (ci, cj) = (ci as i64, cj as i64);
            let row0 = (2 * (ci - r)).max(0);
            let row1 = (2 * (ci + r) + 1).min(n as i64 - 1);
            let col0 = (2 * (cj - r)).max(0) as usize;
            let col1 = (2 * (cj + r) + 1).min(m as i64 - 1).max(0) as usize;
            for row in row0..=row1 {
                let row = row as usize;
                lo[row] = lo[row].min(col0);
                hi[row] = hi[row].max(col1);
            }
        }
        // Rows the projection missed (odd-length tails) inherit their
        // neighbor's range; then make the window connected end to end.
        for i in 0..n {
            if lo[i] == usize::MAX {
                let (l, h) = if i > 0 { (lo[i - 1], hi[i - 1]) } else { (0, 0) };
                lo[i] = l;
                hi[i] = h;
            }
        }
        lo[0] = 0;
        hi[n - 1] = m - 1;
        for i in 1..n {
            hi[i] = hi[i].max(hi[i - 1]);
            lo[i] = lo[i].min(hi[i - 1]);
        }
        Self { lo, hi }
    }
}

fn windowed(x: &[Point2], y: &[Point2], w: &Window) -> DtwResult {
    let n = x.len();
    let rows: Vec<Vec<f64>> = {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(n);
        for i in 0..n {
            let (lo, hi) = (w.lo[i], w.hi[i]);
            let mut row = vec![f64::INFINITY; hi - lo + 1];
            for j in lo..=hi {
                let d = x[i].distance(&y[j]);
                let best = if i == 0 && j == 0 {
                    0.0
                } else {
                    let mut b = f64::INFINITY;
                    if i > 0 {
                        b = b.min(get(&rows[i - 1], w.lo[i - 1], j));
                        if j > 0 {
                            b = b.min(get(&rows[i - 1], w.lo[i - 1], j - 1));
                        }
                    }
                    if j > lo {
                        b = b.min(row[j - 1 - lo]);
                    }
                    b
                };
                row[j - lo] = d + best;
            }
            rows.push(row);
        }
        rows
    };

    let m = y.len();
    let distance = get(&rows[n - 1], w.lo[n - 1], m - 1);
    let mut path = vec![(n - 1, m - 1)];
    let (mut i, mut j) = (n - 1, m - 1);
    while (i, j) != (0, 0) {
        let at = |a: usize, b: usize| get(&rows[a], w.lo[a], b);
        let mut best = (f64::INFINITY, (0, 0));
        // Diagonal first so it wins ties.
        if i > 0 && j > 0 {
            best = (at(i - 1, j - 1), (i - 1, j - 1));
        }
        if i > 0 && at(i - 1, j) < best.0 {
            best = (at(i - 1, j), (i - 1, j));
        }
        if j > 0 && at(i, j - 1) < best.0 {
            best = (at(i, j - 1), (i, j - 1));
        }
        (i, j) = best.1;
        path.push((i, j));
    }
    path.reverse();
    DtwResult {
        distance,
        path: WarpPath(path),
    }
}

fn get(row: &[f64], lo: usize, j: usize) -> f64 {
    if j < lo {
        return f64::INFINITY;
    }
    row.get(j - lo).copied().unwrap_or(f64::INFINITY)
}
