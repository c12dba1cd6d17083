//! Synthetic proving grounds for fixtures and demos.

use super::{RoadStructure, DEFAULT_RESAMPLE_M};
use crate::error::{Error, Result};
use crate::geo::Point2;

/// A Manhattan grid of `blocks × blocks` square blocks of side `block_m`.
/// One straight road per grid line, spanning the whole city.
pub fn grid_city_polylines(blocks: usize, block_m: f64) -> Vec<Vec<Point2>> {
    let span = blocks as f64 * block_m;
    let mut lines = Vec::with_capacity(2 * (blocks + 1));
    for i in 0..=blocks {
        let c = i as f64 * block_m;
        lines.push(vec![Point2::new(0.0, c), Point2::new(span, c)]);
    }
    for i in 0..=blocks {
        let c = i as f64 * block_m;
        lines.push(vec![Point2::new(c, 0.0), Point2::new(c, span)]);
    }
    lines
}

/// `count` disjoint parallel east-west roads, `spacing_m` apart.
pub fn parallel_roads_polylines(count: usize, spacing_m: f64, length_m: f64) -> Vec<Vec<Point2>> {
    (0..count)
        .map(|i| {
            let y = i as f64 * spacing_m;
            vec![Point2::new(0.0, y), Point2::new(length_m, y)]
        })
        .collect()
}

pub fn grid_city(blocks: usize, block_m: f64) -> Result<RoadStructure> {
    if blocks == 0 || !(block_m > 0.0) {
        return Err(Error::Parameter(
            "grid city needs at least one block of positive size".into(),
        ));
    }
    let mut map = RoadStructure::from_polylines(
        format!("grid-city-{blocks}x{blocks}"),
        &grid_city_polylines(blocks, block_m),
        DEFAULT_RESAMPLE_M,
    )?;
    map.area_acres = Some(square_m_to_acres((blocks as f64 * block_m).powi(2)));
    Ok(map)
}

pub fn parallel_roads(count: usize, spacing_m: f64, length_m: f64) -> Result<RoadStructure> {
    if count == 0 || !(spacing_m > 0.0) || !(length_m > 0.0) {
        return Err(Error::Parameter(
            "parallel roads need a positive count, spacing and length".into(),
        ));
    }
    let mut map = RoadStructure::from_polylines(
        format!("parallel-{count}"),
        &parallel_roads_polylines(count, spacing_m, length_m),
        DEFAULT_RESAMPLE_M,
    )?;
    map.area_acres = Some(square_m_to_acres((count.max(2) - 1) as f64 * spacing_m * length_m));
    Ok(map)
}

pub fn square_m_to_acres(area_m2: f64) -> f64 {
    area_m2 / 4_046.856_422_4
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roadnet::bounding_box;

    #[test]
    fn grid_city_shape() {
        let map = grid_city(10, 80.0).unwrap();
        assert_eq!(map.roads.len(), 22);
        let b = bounding_box(&map).unwrap();
        assert_eq!((b.width(), b.height()), (800.0, 800.0));
        assert!(map.roads.iter().all(|r| r.len() == 801));
    }

    #[test]
    fn parallel_shape() {
        let map = parallel_roads(3, 40.0, 200.0).unwrap();
        assert_eq!(map.roads.len(), 3);
        assert!(parallel_roads(0, 1.0, 1.0).is_err());
    }
}
