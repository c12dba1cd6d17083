//! Whole-map evaluation: runs the placement filter over a clustered
//! scenario set and aggregates per-category effectiveness, scenario
//! coverage and land efficiency.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geo::{unproject_sinusoidal, Point2};
use crate::placement::{compute_single_scenario, matching_segment, FilterParams, PlacementResult};
use crate::roadnet::{rasterize, RoadIndex};
use crate::scenario::ClusteredScenarioSet;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryReport {
    /// Mean compatibility of the category; absent for an empty category.
    pub effectiveness: Option<f64>,
    pub count: usize,
    pub results: Vec<PlacementResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectivenessReport {
    pub map_name: String,
    pub per_category: BTreeMap<u32, CategoryReport>,
    /// Mean compatibility over all scenarios, each weighted equally.
    pub coverage: f64,
    /// Mean of the per-category effectiveness over non-empty categories.
    pub coverage_by_category_mean: Option<f64>,
    pub land_efficiency: Option<f64>,
    pub params_used: FilterParams,
}

impl EffectivenessReport {
    pub fn results(&self) -> impl Iterator<Item = &PlacementResult> {
        self.per_category.values().flat_map(|c| &c.results)
    }

    pub fn scenario_count(&self) -> usize {
        self.per_category.values().map(|c| c.count).sum()
    }

    /// Fills `land_efficiency` when the map area is known.
    pub fn set_land_efficiency(&mut self, area_acres: Option<f64>, reference: Option<(f64, f64)>) -> Result<()> {
        self.land_efficiency = match (area_acres, reference) {
            (Some(area), Some(reference)) => Some(land_efficiency(self.coverage, area, reference)?),
            _ => None,
        };
        Ok(())
    }
}

/// Stable per-scenario seed from the master seed and the scenario id
/// (FNV-1a over the id, mixed with SplitMix64).
pub fn scenario_seed(master_seed: u64, scenario_id: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in scenario_id.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = h ^ master_seed.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Places every scenario of `set` on `road` and aggregates the results.
/// `params.seed` is the master seed.
pub fn baseline_effectiveness(
    set: &ClusteredScenarioSet,
    road: &RoadIndex,
    params: &FilterParams,
) -> Result<EffectivenessReport> {
    params.validate()?;
    if set.is_empty() {
        return Err(Error::NoScenarios);
    }
    let jobs: Vec<_> = set.iter().collect();
    let results: Vec<(u32, PlacementResult)> = jobs
        .par_iter()
        .map(|z| {
            let p = FilterParams {
                seed: scenario_seed(params.seed, &z.id),
                ..params.clone()
            };
            let mut r = compute_single_scenario(z, road, &p)?;
            r.trace.clear();
            Ok((z.category, r))
        })
        .collect::<Result<_>>()?;

    let mut per_category: BTreeMap<u32, CategoryReport> = set
        .clusters
        .keys()
        .map(|&k| {
            (
                k,
                CategoryReport {
                    effectiveness: None,
                    count: 0,
                    results: Vec::new(),
                },
            )
        })
        .collect();
    for (k, r) in results {
        per_category.entry(k).or_insert_with(|| CategoryReport {
            effectiveness: None,
            count: 0,
            results: Vec::new(),
        });
        per_category.get_mut(&k).expect("inserted").results.push(r);
    }
    for cat in per_category.values_mut() {
        cat.results.sort_by(|a, b| a.scenario_id.cmp(&b.scenario_id));
        cat.count = cat.results.len();
        cat.effectiveness = mean(cat.results.iter().map(|r| r.compatibility));
    }
    let coverage_by_category_mean = mean(per_category.values().filter_map(|c| c.effectiveness));

    let mut report = EffectivenessReport {
        map_name: road.name.clone(),
        per_category,
        coverage: 0.0,
        coverage_by_category_mean,
        land_efficiency: None,
        params_used: params.clone(),
    };
    report.coverage = scenario_coverage(&report)?;
    Ok(report)
}

fn mean<I: Iterator<Item = f64>>(it: I) -> Option<f64> {
    let (sum, n) = it.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Mean compatibility over every scenario in the report.
pub fn scenario_coverage(report: &EffectivenessReport) -> Result<f64> {
    mean(report.results().map(|r| r.compatibility)).ok_or(Error::NoScenarios)
}

/// Coverage per acre, relative to a reference `(coverage, area_acres)`.
pub fn land_efficiency(coverage: f64, area_acres: f64, reference: (f64, f64)) -> Result<f64> {
    let (ref_coverage, ref_area) = reference;
    if !(area_acres > 0.0) || !(ref_area > 0.0) {
        return Err(Error::Parameter("areas must be positive".into()));
    }
    if !(ref_coverage > 0.0) {
        return Err(Error::Parameter("reference coverage must be positive".into()));
    }
    Ok((coverage / area_acres) / (ref_coverage / ref_area))
}

/// GeoJSON FeatureCollection of every best placement: the placed
/// trajectories and their matching road segments as LineStrings.
///
/// Coordinates are longitude/latitude when the map came from GPS data and
/// map meters otherwise.
pub fn placements_geojson(report: &EffectivenessReport, set: &ClusteredScenarioSet, road: &RoadIndex) -> Value {
    let coords = |pts: &[Point2]| -> Vec<[f64; 2]> {
        match road.central_meridian {
            Some(lon0) => unproject_sinusoidal(pts, lon0).iter().map(|p| [p.lon, p.lat]).collect(),
            None => pts.iter().map(|p| [p.x, p.y]).collect(),
        }
    };
    let mut features = Vec::new();
    for r in report.results() {
        let Some(z) = set.find(&r.scenario_id) else { continue };
        for v in &z.vehicles {
            let placed: Vec<Point2> = v.points.iter().map(|p| r.best_pose.apply(*p)).collect();
            let cells = rasterize(&placed, road.spec());
            let matched: Vec<Point2> = matching_segment(&cells, &road.nearest)
                .into_iter()
                .map(|c| road.spec().cell_center(c))
                .collect();
            for (kind, pts) in [("trajectory", &placed), ("matching_segment", &matched)] {
                features.push(json!({
                    "type": "Feature",
                    "geometry": { "type": "LineString", "coordinates": coords(pts) },
                    "properties": {
                        "scenario_id": z.id,
                        "category": z.category,
                        "vehicle_id": v.vehicle_id,
                        "kind": kind,
                        "compatibility": r.compatibility,
                    },
                }));
            }
        }
    }
    json!({ "type": "FeatureCollection", "features": features })
}
