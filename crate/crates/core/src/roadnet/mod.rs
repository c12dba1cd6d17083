//! Proving-ground road network: OSM ingestion, occupancy-grid registration
//! and nearest-road queries.

mod grid;
mod osm;
pub mod synthetic;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{resample_polyline, BBox, Point2};

pub use grid::{
    build_road_index, nearest_road_cell, rasterize, Cell, GridSpec, NearestRoadIndex, OccupancyGrid,
    DEFAULT_INDEX_MARGIN,
};
pub use osm::{parse_osm, parse_osm_with, write_osm};

/// Default knot spacing applied to roads at ingestion, in meters.
pub const DEFAULT_RESAMPLE_M: f64 = 1.0;

/// A proving ground as a set of polyline roads in a local metric frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadStructure {
    pub name: String,
    pub roads: Vec<Vec<Point2>>,
    pub area_acres: Option<f64>,
    /// Central meridian used when the map was projected from GPS.
    pub central_meridian: Option<f64>,
}

impl RoadStructure {
    /// Builds a map from polylines already in meters, resampling each one.
    /// Polylines with fewer than two distinct knots are dropped.
    pub fn from_polylines(name: impl Into<String>, polylines: &[Vec<Point2>], spacing: f64) -> Result<Self> {
        let mut roads = Vec::with_capacity(polylines.len());
        for line in polylines {
            let mut knots: Vec<Point2> = Vec::with_capacity(line.len());
            for p in line {
                if !p.is_finite() {
                    return Err(Error::Parameter(format!("non-finite road knot {p:?}")));
                }
                if knots.last() != Some(p) {
                    knots.push(*p);
                }
            }
            if knots.len() >= 2 {
                roads.push(resample_polyline(&knots, spacing)?);
            }
        }
        if roads.is_empty() {
            return Err(Error::EmptyMap);
        }
        Ok(Self {
            name: name.into(),
            roads,
            area_acres: None,
            central_meridian: None,
        })
    }

    pub fn knots(&self) -> impl Iterator<Item = &Point2> {
        self.roads.iter().flatten()
    }

    pub fn apply_metadata(&mut self, meta: &MapMetadata) {
        if let Some(name) = &meta.name {
            self.name = name.clone();
        }
        if meta.area_acres.is_some() {
            self.area_acres = meta.area_acres;
        }
    }
}

/// Smallest box enclosing every knot of every road.
pub fn bounding_box(map: &RoadStructure) -> Result<BBox> {
    BBox::enclosing(map.knots()).ok_or(Error::EmptyMap)
}

/// Optional sidecar describing a map: `name = ...`, `area_acres = ...`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MapMetadata {
    pub name: Option<String>,
    pub area_acres: Option<f64>,
}

impl MapMetadata {
    pub fn parse(text: &str) -> Result<Self> {
        let mut meta = MapMetadata::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!(
                    "map metadata line {}: expected key = value",
                    lineno + 1
                )));
            };
            let value = value.trim();
            match key.trim() {
                "name" => meta.name = Some(value.to_string()),
                "area_acres" => {
                    let area: f64 = value.parse().map_err(|_| {
                        Error::Config(format!("map metadata line {}: bad area_acres {value:?}", lineno + 1))
                    })?;
                    if !(area > 0.0) {
                        return Err(Error::Config(format!(
                            "map metadata line {}: area_acres must be positive",
                            lineno + 1
                        )));
                    }
                    meta.area_acres = Some(area);
                }
                _ => {}
            }
        }
        Ok(meta)
    }
}

/// A map registered with an occupancy grid plus its nearest-road table.
#[derive(Debug, Clone)]
pub struct RoadIndex {
    pub name: String,
    pub area_acres: Option<f64>,
    pub central_meridian: Option<f64>,
    pub bbox: BBox,
    pub grid: OccupancyGrid,
    pub nearest: NearestRoadIndex,
}

impl RoadIndex {
    /// Registers `map` on a square grid of `grid_m` meters anchored at the
    /// map's bounding box (see [`GridSpec::for_map`]).
    pub fn build(map: &RoadStructure, grid_m: f64) -> Result<Self> {
        let spec = GridSpec::for_map(map, grid_m)?;
        let bbox = bounding_box(map)?;
        let (grid, nearest) = build_road_index(map, spec)?;
        Ok(Self {
            name: map.name.clone(),
            area_acres: map.area_acres,
            central_meridian: map.central_meridian,
            bbox,
            grid,
            nearest,
        })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.grid.spec
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bbox_examples() {
        let map =
            RoadStructure::from_polylines("a", &[vec![Point2::new(0.0, 0.0), Point2::new(10.0, 5.0)]], 1.0).unwrap();
        let b = bounding_box(&map).unwrap();
        assert_eq!((b.min, b.max), (Point2::new(0.0, 0.0), Point2::new(10.0, 5.0)));

        let map = RoadStructure::from_polylines(
            "b",
            &[
                vec![Point2::new(-3.0, 2.0), Point2::new(1.0, 4.0)],
                vec![Point2::new(7.0, 9.0), Point2::new(0.0, 5.0)],
            ],
            1.0,
        )
        .unwrap();
        let b = bounding_box(&map).unwrap();
        assert_eq!((b.min, b.max), (Point2::new(-3.0, 2.0), Point2::new(7.0, 9.0)));
    }

    #[test]
    fn empty_map_rejected() {
        let err = RoadStructure::from_polylines("x", &[vec![Point2::new(1.0, 1.0)]], 1.0);
        assert!(matches!(err, Err(Error::EmptyMap)));
        let empty = RoadStructure {
            name: String::new(),
            roads: vec![],
            area_acres: None,
            central_meridian: None,
        };
        assert!(matches!(bounding_box(&empty), Err(Error::EmptyMap)));
    }

    #[test]
    fn metadata_parsing() {
        let meta = MapMetadata::parse("# sidecar\nname = Mcity\narea_acres = 32\nother = 1\n").unwrap();
        assert_eq!(meta.name.as_deref(), Some("Mcity"));
        assert_eq!(meta.area_acres, Some(32.0));
        assert!(MapMetadata::parse("area_acres = -1").is_err());
        assert!(MapMetadata::parse("garbage").is_err());
    }
}
