use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{bounding_box, RoadStructure};
use crate::error::{Error, Result};
use crate::geo::Point2;

/// Integer grid cell `(ix, iy)`.
pub type Cell = (i64, i64);

/// Cells of margin kept around the occupied region in the nearest-road table.
pub const DEFAULT_INDEX_MARGIN: i64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lambda_x: f64,
    pub lambda_y: f64,
    pub origin: Point2,
}

impl GridSpec {
    pub fn new(lambda_x: f64, lambda_y: f64, origin: Point2) -> Result<Self> {
        if !(lambda_x > 0.0 && lambda_y > 0.0) || !lambda_x.is_finite() || !lambda_y.is_finite() {
            return Err(Error::Parameter(format!(
                "grid sizes must be positive, got ({lambda_x}, {lambda_y})"
            )));
        }
        if !origin.is_finite() {
            return Err(Error::Parameter("grid origin must be finite".into()));
        }
        Ok(Self {
            lambda_x,
            lambda_y,
            origin,
        })
    }

    /// Square grid for `map`: origin half a cell below and left of the
    /// bounding-box min corner, so knots on the box edge (and on any line a
    /// whole number of cells away) sit at cell centers rather than on cell
    /// boundaries.
    pub fn for_map(map: &RoadStructure, grid_m: f64) -> Result<Self> {
        let bbox = bounding_box(map)?;
        let origin = Point2::new(bbox.min.x - grid_m / 2.0, bbox.min.y - grid_m / 2.0);
        Self::new(grid_m, grid_m, origin)
    }

    pub fn cell_of(&self, p: Point2) -> Cell {
        (
            ((p.x - self.origin.x) / self.lambda_x).floor() as i64,
            ((p.y - self.origin.y) / self.lambda_y).floor() as i64,
        )
    }

    /// Center of a cell in map meters.
    pub fn cell_center(&self, c: Cell) -> Point2 {
        Point2::new(
            self.origin.x + (c.0 as f64 + 0.5) * self.lambda_x,
            self.origin.y + (c.1 as f64 + 0.5) * self.lambda_y,
        )
    }
}

/// Maps every point to the grid cell containing it. Output length equals
/// input length; repeated cells are kept.
pub fn rasterize(points: &[Point2], spec: &GridSpec) -> Vec<Cell> {
    points.iter().map(|p| spec.cell_of(*p)).collect()
}

/// Binary occupancy grid of road cells.
#[derive(Debug, Clone, PartialEq)]
pub struct OccupancyGrid {
    pub spec: GridSpec,
    pub occupied: BTreeSet<Cell>,
}

impl OccupancyGrid {
    pub fn is_occupied(&self, c: Cell) -> bool {
        self.occupied.contains(&c)
    }
}

/// Rasterizes every road of `map` and builds the nearest-road table.
pub fn build_road_index(map: &RoadStructure, spec: GridSpec) -> Result<(OccupancyGrid, NearestRoadIndex)> {
    if map.roads.iter().all(|r| r.is_empty()) {
        return Err(Error::EmptyMap);
    }
    let occupied: BTreeSet<Cell> = map.roads.iter().flat_map(|r| rasterize(r, &spec)).collect();
    let nearest = NearestRoadIndex::new(&occupied, DEFAULT_INDEX_MARGIN)?;
    Ok((OccupancyGrid { spec, occupied }, nearest))
}

/// Exact nearest-occupied-cell lookup under Euclidean distance on cell
/// indices. Ties resolve to the lexicographically smallest `(ix, iy)`.
///
/// A precomputed table covers the occupied region plus a margin; queries
/// outside it scan every occupied cell.
#[derive(Debug, Clone)]
pub struct NearestRoadIndex {
    x0: i64,
    y0: i64,
    width: i64,
    height: i64,
    table: Vec<Cell>,
    cells: Vec<Cell>,
}

impl NearestRoadIndex {
    pub fn new(occupied: &BTreeSet<Cell>, margin: i64) -> Result<Self> {
        let cells: Vec<Cell> = occupied.iter().copied().collect();
        let (Some(first), Some(_)) = (cells.first(), cells.last()) else {
            return Err(Error::EmptyMap);
        };
        let margin = margin.max(0);
        let (mut xmin, mut xmax, mut ymin, mut ymax) = (first.0, first.0, first.1, first.1);
        for &(x, y) in &cells {
            xmin = xmin.min(x);
            xmax = xmax.max(x);
            ymin = ymin.min(y);
            ymax = ymax.max(y);
        }
        let x0 = xmin - margin;
        let y0 = ymin - margin;
        let width = xmax - xmin + 1 + 2 * margin;
        let height = ymax - ymin + 1 + 2 * margin;
        let table = distance_transform(&cells, x0, y0, width, height);
        Ok(Self {
            x0,
            y0,
            width,
            height,
            table,
            cells,
        })
    }

    pub fn nearest(&self, cell: Cell) -> Cell {
        let (lx, ly) = (cell.0 - self.x0, cell.1 - self.y0);
        if (0..self.width).contains(&lx) && (0..self.height).contains(&ly) {
            self.table[(ly * self.width + lx) as usize]
        } else {
            scan_nearest(&self.cells, cell)
        }
    }

    /// Occupied cells in lexicographic order.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn is_in_table(&self, cell: Cell) -> bool {
        (0..self.width).contains(&(cell.0 - self.x0)) && (0..self.height).contains(&(cell.1 - self.y0))
    }
}

/// Nearest occupied cell to `cell`.
pub fn nearest_road_cell(index: &NearestRoadIndex, cell: Cell) -> Cell {
    index.nearest(cell)
}

pub(crate) fn dist2(a: Cell, b: Cell) -> i64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    dx * dx + dy * dy
}

/// `cells` must be lexicographically sorted; the first minimum wins.
fn scan_nearest(cells: &[Cell], q: Cell) -> Cell {
    let mut best = cells[0];
    let mut best_d = dist2(best, q);
    for &c in &cells[1..] {
        let d = dist2(c, q);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

/// Exact rational `num / den` with `den > 0`.
#[derive(Clone, Copy)]
struct Ratio {
    num: i128,
    den: i128,
}

impl Ratio {
    fn le(self, other: Ratio) -> bool {
        self.num * other.den <= other.num * self.den
    }

    fn lt_int(self, x: i64) -> bool {
        self.num < x as i128 * self.den
    }
}

/// Two-pass exact Euclidean distance transform returning, for every table
/// cell, the lexicographically smallest nearest occupied cell.
fn distance_transform(cells: &[Cell], x0: i64, y0: i64, width: i64, height: i64) -> Vec<Cell> {
    let w = width as usize;
    let h = height as usize;
    let mut occ = vec![false; w * h];
    for &(x, y) in cells {
        occ[(y - y0) as usize * w + (x - x0) as usize] = true;
    }

    // Column pass: nearest occupied row within each column. Ties pick the
    // lower row, which is the lexicographically smaller cell.
    const NONE: i64 = i64::MIN;
    let mut col_row = vec![NONE; w * h];
    for x in 0..w {
        let mut last = NONE;
        for y in 0..h {
            if occ[y * w + x] {
                last = y as i64;
            }
            col_row[y * w + x] = last;
        }
        let mut next = NONE;
        for y in (0..h).rev() {
            if occ[y * w + x] {
                next = y as i64;
            }
            let below = col_row[y * w + x];
            let yi = y as i64;
            let pick = match (below, next) {
                (NONE, n) => n,
                (b, NONE) => b,
                (b, n) => {
                    if n - yi < yi - b {
                        n
                    } else {
                        b
                    }
                }
            };
            col_row[y * w + x] = pick;
        }
    }

    // Row pass: lower envelope of parabolas (x - q)^2 + g_q^2, with ties at
    // integer abscissae resolved toward the smaller q.
    let mut table = vec![(0, 0); w * h];
    let mut v: Vec<i64> = Vec::with_capacity(w);
    let mut z: Vec<Ratio> = Vec::with_capacity(w);
    let mut f = vec![0i64; w];
    for y in 0..h {
        v.clear();
        z.clear();
        let yi = y as i64;
        for q in 0..w {
            let r = col_row[y * w + q];
            if r == NONE {
                continue;
            }
            let g = r - yi;
            f[q] = g * g;
            let qi = q as i64;
            loop {
                let Some(&p) = v.last() else {
                    v.push(qi);
                    z.push(Ratio {
                        num: i128::MIN / 4,
                        den: 1,
                    });
                    break;
                };
                let pu = p as usize;
                let s = Ratio {
                    num: ((f[q] + qi * qi) - (f[pu] + p * p)) as i128,
                    den: (2 * (qi - p)) as i128,
                };
                let k = v.len() - 1;
                if k > 0 && s.le(z[k]) {
                    v.pop();
                    z.pop();
                    continue;
                }
                v.push(qi);
                z.push(s);
                break;
            }
        }
        let mut k = 0;
        for x in 0..w {
            let xi = x as i64;
            while k + 1 < v.len() && z[k + 1].lt_int(xi) {
                k += 1;
            }
            let q = v[k];
            let row = col_row[y * w + q as usize];
            table[y * w + x] = (q + x0, row + y0);
        }
    }
    table
}
