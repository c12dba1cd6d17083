//! Multi-vehicle scenarios: ingestion, validation and synthesis.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::TAU;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::geo::{polyline_length, project_sinusoidal, resample_polyline, LatLon, Point2, Pose};
use crate::roadnet::RoadStructure;

/// At least one trajectory of a scenario must be at least this long.
pub const MIN_TRAJECTORY_M: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub vehicle_id: String,
    pub points: Vec<Point2>,
}

/// D vehicle trajectories placed together as one rigid body.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub id: String,
    pub category: u32,
    pub vehicles: Vec<Trajectory>,
}

impl Scenario {
    pub fn centroid(&self) -> Option<Point2> {
        let n = self.vehicles.iter().map(|v| v.points.len()).sum::<usize>();
        if n == 0 {
            return None;
        }
        let (sx, sy) = self
            .vehicles
            .iter()
            .flat_map(|v| &v.points)
            .fold((0.0, 0.0), |(sx, sy), p| (sx + p.x, sy + p.y));
        Some(Point2::new(sx / n as f64, sy / n as f64))
    }

    /// Moves the scenario frame so the centroid of all points is the origin.
    pub fn center(&mut self) {
        if let Some(c) = self.centroid() {
            for p in self.vehicles.iter_mut().flat_map(|v| v.points.iter_mut()) {
                p.x -= c.x;
                p.y -= c.y;
            }
        }
    }
}

/// Scenarios grouped by category `1..=k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClusteredScenarioSet {
    pub clusters: BTreeMap<u32, Vec<Scenario>>,
    pub k: u32,
}

impl ClusteredScenarioSet {
    /// Groups `scenarios` by category; `k` is the largest category present.
    pub fn from_scenarios(scenarios: Vec<Scenario>) -> Self {
        let k = scenarios.iter().map(|s| s.category).max().unwrap_or(0);
        let mut clusters: BTreeMap<u32, Vec<Scenario>> = (1..=k).map(|c| (c, Vec::new())).collect();
        for s in scenarios {
            clusters.entry(s.category).or_default().push(s);
        }
        Self { clusters, k }
    }

    pub fn len(&self) -> usize {
        self.clusters.values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn iter(&self) -> impl Iterator<Item = &Scenario> {
        self.clusters.values().flatten()
    }

    pub fn find(&self, id: &str) -> Option<&Scenario> {
        self.iter().find(|s| s.id == id)
    }

    pub fn empty_categories(&self) -> Vec<u32> {
        self.clusters
            .iter()
            .filter(|(_, v)| v.is_empty())
            .map(|(k, _)| *k)
            .collect()
    }
}

/// One violated scenario invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Diagnostic {
    EmptyVehicleList,
    BadCategory(u32),
    TooFewPoints { vehicle: String, count: usize },
    NonFinite { vehicle: String, index: usize },
    MinLength { longest: f64 },
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diagnostic::EmptyVehicleList => write!(f, "empty vehicle list"),
            Diagnostic::BadCategory(c) => write!(f, "category {c} is below 1"),
            Diagnostic::TooFewPoints { vehicle, count } => {
                write!(f, "vehicle {vehicle} has {count} points, need at least 2")
            }
            Diagnostic::NonFinite { vehicle, index } => {
                write!(f, "non-finite point at vehicle {vehicle}, index {index}")
            }
            Diagnostic::MinLength { longest } => write!(
                f,
                "min-length: no trajectory reaches {MIN_TRAJECTORY_M} m (longest {longest:.2} m)"
            ),
        }
    }
}

/// Returns one diagnostic per violated invariant; empty when valid.
pub fn validate_scenario(z: &Scenario) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if z.category < 1 {
        out.push(Diagnostic::BadCategory(z.category));
    }
    if z.vehicles.is_empty() {
        out.push(Diagnostic::EmptyVehicleList);
        return out;
    }
    let mut longest: f64 = 0.0;
    let mut all_finite = true;
    for v in &z.vehicles {
        if v.points.len() < 2 {
            out.push(Diagnostic::TooFewPoints {
                vehicle: v.vehicle_id.clone(),
                count: v.points.len(),
            });
        }
        if let Some(index) = v.points.iter().position(|p| !p.is_finite()) {
            all_finite = false;
            out.push(Diagnostic::NonFinite {
                vehicle: v.vehicle_id.clone(),
                index,
            });
        }
        longest = longest.max(polyline_length(&v.points));
    }
    if all_finite && longest < MIN_TRAJECTORY_M {
        out.push(Diagnostic::MinLength { longest });
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Crs {
    Gps,
    LocalMeters,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rejected {
    pub id: String,
    pub diagnostics: Vec<Diagnostic>,
}

/// Result of ingesting a scenario file.
#[derive(Debug, Clone)]
pub struct LoadedScenarios {
    pub set: ClusteredScenarioSet,
    pub rejected: Vec<Rejected>,
    pub warnings: Vec<String>,
}

/// Parses a scenario file, resampling trajectories at 1 m.
pub fn load_scenarios(document: &[u8]) -> Result<LoadedScenarios> {
    load_scenarios_with(document, 1.0)
}

pub fn load_scenarios_with(document: &[u8], spacing: f64) -> Result<LoadedScenarios> {
    let root: Value = serde_json::from_slice(document).map_err(|e| Error::Schema {
        path: "$".into(),
        message: format!("invalid JSON: {e}"),
    })?;
    let crs = match root.get("crs").and_then(Value::as_str) {
        Some("gps") => Crs::Gps,
        Some("local_meters") => Crs::LocalMeters,
        _ => return Err(schema("$.crs", "expected \"gps\" or \"local_meters\"")),
    };
    let list = root
        .get("scenarios")
        .and_then(Value::as_array)
        .ok_or_else(|| schema("$.scenarios", "expected an array"))?;
    if list.is_empty() {
        return Err(Error::EmptyScenarioList);
    }

    let mut seen = BTreeSet::new();
    let mut accepted = Vec::new();
    let mut rejected = Vec::new();
    for (i, item) in list.iter().enumerate() {
        let path = format!("$.scenarios[{i}]");
        let mut z = parse_scenario(item, &path, crs)?;
        if !seen.insert(z.id.clone()) {
            return Err(schema(
                &format!("{path}.id"),
                &format!("duplicate scenario id {:?}", z.id),
            ));
        }
        for v in &mut z.vehicles {
            if v.points.iter().all(Point2::is_finite) {
                v.points = resample_polyline(&v.points, spacing)?;
            }
        }
        let diagnostics = validate_scenario(&z);
        if diagnostics.is_empty() {
            z.center();
            accepted.push(z);
        } else {
            rejected.push(Rejected { id: z.id, diagnostics });
        }
    }
    if accepted.is_empty() {
        let detail = rejected
            .iter()
            .map(|r| {
                let msgs: Vec<String> = r.diagnostics.iter().map(ToString::to_string).collect();
                format!("{}: {}", r.id, msgs.join("; "))
            })
            .collect::<Vec<_>>()
            .join(" | ");
        return Err(Error::NoValidScenarios(detail));
    }
    let set = ClusteredScenarioSet::from_scenarios(accepted);
    let warnings = set
        .empty_categories()
        .into_iter()
        .map(|k| format!("category {k} has no scenarios"))
        .collect();
    Ok(LoadedScenarios {
        set,
        rejected,
        warnings,
    })
}

fn schema(path: &str, message: &str) -> Error {
    Error::Schema {
        path: path.to_string(),
        message: message.to_string(),
    }
}

fn parse_scenario(item: &Value, path: &str, crs: Crs) -> Result<Scenario> {
    let id = item
        .get("id")
        .and_then(Value::as_str)
        .ok_or_else(|| schema(&format!("{path}.id"), "expected a string"))?
        .to_string();
    let category = item
        .get("category")
        .and_then(Value::as_i64)
        .ok_or_else(|| schema(&format!("{path}.category"), "expected an integer"))?;
    if category < 1 || category > u32::MAX as i64 {
        return Err(schema(
            &format!("{path}.category"),
            &format!("category must be >= 1, got {category}"),
        ));
    }
    let vehicles = item
        .get("vehicles")
        .and_then(Value::as_array)
        .ok_or_else(|| schema(&format!("{path}.vehicles"), "expected an array"))?;

    let mut raw: Vec<(String, Vec<[f64; 2]>)> = Vec::with_capacity(vehicles.len());
    for (j, v) in vehicles.iter().enumerate() {
        let vpath = format!("{path}.vehicles[{j}]");
        let vid = v
            .get("id")
            .and_then(Value::as_str)
            .ok_or_else(|| schema(&format!("{vpath}.id"), "expected a string"))?;
        let traj = v
            .get("trajectory")
            .and_then(Value::as_array)
            .ok_or_else(|| schema(&format!("{vpath}.trajectory"), "expected an array"))?;
        let mut pts = Vec::with_capacity(traj.len());
        for (t, pair) in traj.iter().enumerate() {
            let coords = pair
                .as_array()
                .filter(|a| a.len() == 2)
                .and_then(|a| Some([a[0].as_f64()?, a[1].as_f64()?]))
                .ok_or_else(|| schema(&format!("{vpath}.trajectory[{t}]"), "expected [number, number]"))?;
            pts.push(coords);
        }
        raw.push((vid.to_string(), pts));
    }

    let vehicles = match crs {
        Crs::LocalMeters => raw
            .into_iter()
            .map(|(vehicle_id, pts)| Trajectory {
                vehicle_id,
                points: pts.iter().map(|p| Point2::new(p[0], p[1])).collect(),
            })
            .collect(),
        Crs::Gps => {
            // One central meridian per scenario keeps all vehicles in a
            // common frame.
            let all: Vec<LatLon> = raw
                .iter()
                .flat_map(|(_, p)| p)
                .map(|p| LatLon::new(p[0], p[1]))
                .collect();
            let projected = project_sinusoidal(&all, None).map_err(|e| match e {
                Error::CoordinateRange { index, detail } => {
                    let (mut j, mut t) = (0, index);
                    while t >= raw[j].1.len() {
                        t -= raw[j].1.len();
                        j += 1;
                    }
                    schema(&format!("{path}.vehicles[{j}].trajectory[{t}]"), &detail)
                }
                other => other,
            })?;
            let mut it = projected.into_iter();
            raw.into_iter()
                .map(|(vehicle_id, pts)| Trajectory {
                    vehicle_id,
                    points: it.by_ref().take(pts.len()).collect(),
                })
                .collect()
        }
    };
    Ok(Scenario {
        id,
        category: category as u32,
        vehicles,
    })
}

/// Serializes scenarios in the `local_meters` scenario file format.
pub fn scenarios_to_json<'a, I>(scenarios: I) -> String
where
    I: IntoIterator<Item = &'a Scenario>,
{
    let list: Vec<Value> = scenarios
        .into_iter()
        .map(|z| {
            json!({
                "id": z.id,
                "category": z.category,
                "vehicles": z.vehicles.iter().map(|v| json!({
                    "id": v.vehicle_id,
                    "trajectory": v.points.iter().map(|p| [p.x, p.y]).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            })
        })
        .collect();
    let doc = json!({ "crs": "local_meters", "scenarios": list });
    let mut s = serde_json::to_string_pretty(&doc).expect("scenario JSON is always serializable");
    s.push('\n');
    s
}

/// Shape of a synthesized scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SynthKind {
    /// A single vehicle driving a contiguous stretch of one map road.
    OnRoadPath,
    /// Two vehicles crossing at right angles.
    TwoCrossing,
    /// Two vehicles driving side by side at a constant lateral gap.
    TwoParallel { offset_m: f64 },
}

impl SynthKind {
    pub fn name(&self) -> &'static str {
        match self {
            SynthKind::OnRoadPath => "on-road-path",
            SynthKind::TwoCrossing => "two-crossing",
            SynthKind::TwoParallel { .. } => "two-parallel",
        }
    }

    pub fn category(&self) -> u32 {
        match self {
            SynthKind::OnRoadPath | SynthKind::TwoCrossing => 1,
            SynthKind::TwoParallel { .. } => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthesizedScenario {
    pub scenario: Scenario,
    /// Pose mapping the scenario back onto its source road, when known.
    pub planted: Option<Pose>,
}

/// Builds a deterministic scenario fixture from `seed`.
pub fn synthesize_scenario(
    map: &RoadStructure,
    kind: SynthKind,
    length_m: f64,
    seed: u64,
) -> Result<SynthesizedScenario> {
    if !(length_m >= MIN_TRAJECTORY_M) || !length_m.is_finite() {
        return Err(Error::Parameter(format!(
            "synthesized length must be at least {MIN_TRAJECTORY_M} m, got {length_m}"
        )));
    }
    if map.roads.is_empty() {
        return Err(Error::EmptyMap);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let theta = rng.random_range(0.0..TAU);
    let id = format!("{}-{seed}", kind.name());

    let (vehicles, planted) = match kind {
        SynthKind::OnRoadPath => {
            let path = carve_road_path(map, length_m, &mut rng)?;
            let pts: Vec<Point2> = path;
            let n = pts.len() as f64;
            let c = Point2::new(
                pts.iter().map(|p| p.x).sum::<f64>() / n,
                pts.iter().map(|p| p.y).sum::<f64>() / n,
            );
            let planted = Pose::new(c.x, c.y, theta);
            let to_local = planted.inverse();
            let local = pts.iter().map(|p| to_local.apply(*p)).collect();
            (
                vec![Trajectory {
                    vehicle_id: "a".into(),
                    points: local,
                }],
                Some(planted),
            )
        }
        SynthKind::TwoCrossing => {
            let fa = rng.random_range(0.25..0.75);
            let fb = rng.random_range(0.25..0.75);
            let a = straight(
                Point2::new(-fa * length_m, 0.0),
                Point2::new((1.0 - fa) * length_m, 0.0),
            )?;
            let b = straight(
                Point2::new(0.0, -fb * length_m),
                Point2::new(0.0, (1.0 - fb) * length_m),
            )?;
            (two(a, b), None)
        }
        SynthKind::TwoParallel { offset_m } => {
            if !offset_m.is_finite() {
                return Err(Error::Parameter("parallel offset must be finite".into()));
            }
            let a = straight(Point2::new(0.0, 0.0), Point2::new(length_m, 0.0))?;
            let b = straight(Point2::new(0.0, offset_m), Point2::new(length_m, offset_m))?;
            (two(a, b), None)
        }
    };

    let mut scenario = Scenario {
        id,
        category: kind.category(),
        vehicles,
    };
    if planted.is_none() {
        let rot = Pose::new(0.0, 0.0, theta);
        for p in scenario.vehicles.iter_mut().flat_map(|v| v.points.iter_mut()) {
            *p = rot.apply(*p);
        }
        scenario.center();
    }
    Ok(SynthesizedScenario { scenario, planted })
}

fn straight(a: Point2, b: Point2) -> Result<Vec<Point2>> {
    resample_polyline(&[a, b], 1.0)
}

fn two(a: Vec<Point2>, b: Vec<Point2>) -> Vec<Trajectory> {
    vec![
        Trajectory {
            vehicle_id: "a".into(),
            points: a,
        },
        Trajectory {
            vehicle_id: "b".into(),
            points: b,
        },
    ]
}

/// Picks a random road at least `length_m` long and returns the shortest run
/// of consecutive knots from a random start that covers `length_m`.
fn carve_road_path(map: &RoadStructure, length_m: f64, rng: &mut ChaCha8Rng) -> Result<Vec<Point2>> {
    const SLACK: f64 = 1e-9;
    let cums: Vec<Vec<f64>> = map
        .roads
        .iter()
        .map(|r| {
            let mut acc = 0.0;
            std::iter::once(0.0)
                .chain(r.windows(2).map(|w| {
                    acc += w[0].distance(&w[1]);
                    acc
                }))
                .collect()
        })
        .collect();
    let candidates: Vec<usize> = (0..map.roads.len())
        .filter(|&i| cums[i].last().copied().unwrap_or(0.0) >= length_m - SLACK)
        .collect();
    if candidates.is_empty() {
        let longest = cums.iter().filter_map(|c| c.last().copied()).fold(0.0, f64::max);
        return Err(Error::PathTooLong {
            requested: length_m,
            longest,
        });
    }
    let road_idx = candidates[rng.random_range(0..candidates.len())];
    let cum = &cums[road_idx];
    let total = *cum.last().unwrap();
    let last_start = cum.iter().rposition(|&c| total - c >= length_m - SLACK).unwrap_or(0);
    let start = rng.random_range(0..=last_start);
    let end = (start..cum.len())
        .find(|&e| cum[e] - cum[start] >= length_m - SLACK)
        .unwrap_or(cum.len() - 1);
    Ok(map.roads[road_idx][start..=end].to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::apply_pose;
    use crate::roadnet::synthetic;

    fn straight_map(len: f64) -> RoadStructure {
        RoadStructure::from_polylines("s", &[vec![Point2::new(0.0, 0.0), Point2::new(len, 0.0)]], 1.0).unwrap()
    }

    fn traj(id: &str, pts: &[(f64, f64)]) -> Trajectory {
        Trajectory {
            vehicle_id: id.into(),
            points: pts.iter().map(|&(x, y)| Point2::new(x, y)).collect(),
        }
    }

    #[test]
    fn validation() {
        let ok = Scenario {
            id: "z".into(),
            category: 1,
            vehicles: vec![
                traj("a", &[(0.0, 0.0), (6.0, 0.0)]),
                traj("b", &[(0.0, 1.0), (1.0, 1.0)]),
            ],
        };
        assert!(validate_scenario(&ok).is_empty());

        let mut nan = ok.clone();
        nan.vehicles[0].points = (0..6).map(|i| Point2::new(i as f64 * 2.0, 0.0)).collect();
        nan.vehicles[0].points[3].y = f64::NAN;
        let d = validate_scenario(&nan);
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].to_string(), "non-finite point at vehicle a, index 3");

        let empty = Scenario {
            vehicles: vec![],
            ..ok.clone()
        };
        assert_eq!(validate_scenario(&empty)[0].to_string(), "empty vehicle list");

        let short = Scenario {
            vehicles: vec![
                traj("a", &[(0.0, 0.0), (4.0, 0.0)]),
                traj("b", &[(0.0, 0.0), (0.0, 3.0)]),
            ],
            ..ok.clone()
        };
        let d = validate_scenario(&short);
        assert!(matches!(d[..], [Diagnostic::MinLength { .. }]));
        assert!(d[0].to_string().starts_with("min-length"));
    }

    #[test]
    fn load_single_scenario() {
        let doc = r#"{"crs":"local_meters","scenarios":[{"id":"s1","category":1,"vehicles":[
            {"id":"a","trajectory":[[0,0],[10,0]]},{"id":"b","trajectory":[[0,2],[10,2]]}]}]}"#;
        let loaded = load_scenarios(doc.as_bytes()).unwrap();
        assert_eq!(loaded.set.k, 1);
        let z = &loaded.set.clusters[&1][0];
        assert_eq!(z.vehicles.len(), 2);
        assert_eq!(z.vehicles[0].points.len(), 11);
        let c = z.centroid().unwrap();
        assert!(c.x.abs() < 1e-12 && c.y.abs() < 1e-12);
        assert!(loaded.rejected.is_empty() && loaded.warnings.is_empty());
    }

    #[test]
    fn load_rejects_short_and_flags_gaps() {
        let doc = r#"{"crs":"local_meters","scenarios":[
            {"id":"short","category":1,"vehicles":[{"id":"a","trajectory":[[0,0],[3,0]]}]},
            {"id":"one","category":1,"vehicles":[{"id":"a","trajectory":[[0,0],[30,0]]}]},
            {"id":"three","category":3,"vehicles":[{"id":"a","trajectory":[[0,0],[0,30]]}]}]}"#;
        let loaded = load_scenarios(doc.as_bytes()).unwrap();
        assert_eq!(loaded.set.k, 3);
        assert_eq!(loaded.set.len(), 2);
        assert_eq!(loaded.rejected.len(), 1);
        assert_eq!(loaded.rejected[0].id, "short");
        assert!(matches!(
            loaded.rejected[0].diagnostics[0],
            Diagnostic::MinLength { .. }
        ));
        assert!(loaded.set.clusters[&2].is_empty());
        assert_eq!(loaded.warnings, vec!["category 2 has no scenarios".to_string()]);
    }

    #[test]
    fn load_errors() {
        assert!(matches!(
            load_scenarios(br#"{"crs":"local_meters","scenarios":[]}"#),
            Err(Error::EmptyScenarioList)
        ));
        match load_scenarios(br#"{"crs":"local_meters","scenarios":[{"id":"x","category":0,"vehicles":[]}]}"#) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "$.scenarios[0].category"),
            other => panic!("{other:?}"),
        }
        match load_scenarios(br#"{"crs":"local_meters","scenarios":[{"id":"x","category":1,"vehicles":[{"id":"a","trajectory":[[0,0],[1]]}]}]}"#) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "$.scenarios[0].vehicles[0].trajectory[1]"),
            other => panic!("{other:?}"),
        }
        match load_scenarios(br#"{"crs":"utm","scenarios":[]}"#) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "$.crs"),
            other => panic!("{other:?}"),
        }
        match load_scenarios(br#"{"crs":"gps","scenarios":[{"id":"x","category":1,"vehicles":[{"id":"a","trajectory":[[42,-83],[95,-83]]}]}]}"#) {
            Err(Error::Schema { path, .. }) => assert_eq!(path, "$.scenarios[0].vehicles[0].trajectory[1]"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gps_scenarios_are_projected() {
        let doc = r#"{"crs":"gps","scenarios":[{"id":"g","category":2,"vehicles":[
            {"id":"a","trajectory":[[42.0,-83.0],[42.0,-82.9999]]}]}]}"#;
        let loaded = load_scenarios(doc.as_bytes()).unwrap();
        let z = &loaded.set.clusters[&2][0];
        let len = polyline_length(&z.vehicles[0].points);
        // 1e-4 degrees of longitude at 42N.
        let expect = crate::geo::EARTH_RADIUS_M * 1e-4f64.to_radians() * 42f64.to_radians().cos();
        assert!((len - expect).abs() < 1e-6, "{len} vs {expect}");
    }

    #[test]
    fn synthesized_on_road_path() {
        let map = straight_map(100.0);
        let s = synthesize_scenario(&map, SynthKind::OnRoadPath, 30.0, 3).unwrap();
        let pts = &s.scenario.vehicles[0].points;
        assert_eq!(pts.len(), 31);
        let back = apply_pose(pts, &s.planted.unwrap());
        for p in back {
            assert!(p.y.abs() < 1e-9 && (-1e-9..=100.0 + 1e-9).contains(&p.x));
        }
        assert_eq!(s, synthesize_scenario(&map, SynthKind::OnRoadPath, 30.0, 3).unwrap());
        assert!(matches!(
            synthesize_scenario(&map, SynthKind::OnRoadPath, 150.0, 3),
            Err(Error::PathTooLong { .. })
        ));
        assert!(synthesize_scenario(&map, SynthKind::OnRoadPath, 4.0, 3).is_err());
    }

    #[test]
    fn synthesized_pairs() {
        let map = synthetic::grid_city(2, 80.0).unwrap();
        let s = synthesize_scenario(&map, SynthKind::TwoParallel { offset_m: 4.0 }, 20.0, 9).unwrap();
        let (a, b) = (&s.scenario.vehicles[0].points, &s.scenario.vehicles[1].points);
        assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(b) {
            assert!((p.distance(q) - 4.0).abs() < 1e-9);
        }
        assert_eq!(s.scenario.category, 4);
        let c = synthesize_scenario(&map, SynthKind::TwoCrossing, 40.0, 9).unwrap();
        assert_eq!(c.scenario.category, 1);
        assert!(validate_scenario(&c.scenario).is_empty());
    }

    #[test]
    fn round_trip_through_json() {
        let map = synthetic::grid_city(3, 80.0).unwrap();
        let zs: Vec<Scenario> = (0..4)
            .map(|seed| {
                synthesize_scenario(&map, SynthKind::OnRoadPath, 40.0, seed)
                    .unwrap()
                    .scenario
            })
            .chain([synthesize_scenario(&map, SynthKind::TwoCrossing, 30.0, 1)
                .unwrap()
                .scenario])
            .collect();
        let first = load_scenarios(scenarios_to_json(&zs).as_bytes()).unwrap().set;
        let text = scenarios_to_json(first.iter());
        let second = load_scenarios(text.as_bytes()).unwrap().set;
        for (a, b) in first.iter().zip(second.iter()) {
            assert_eq!(a.id, b.id);
            for (va, vb) in a.vehicles.iter().zip(&b.vehicles) {
                assert_eq!(va.points.len(), vb.points.len());
                for (p, q) in va.points.iter().zip(&vb.points) {
                    assert!((p.x - q.x).abs() < 1e-9 && (p.y - q.y).abs() < 1e-9);
                }
            }
        }
    }
}
