//! Python bindings for `pgeval`.

use pyo3::exceptions::{PyIOError, PyKeyError, PyValueError};
use pyo3::prelude::*;

use pgeval::bench::{self, baseline_effectiveness};
use pgeval::dtw;
use pgeval::geo::{Point2, Pose};
use pgeval::placement::{self, compute_single_scenario};
use pgeval::roadnet::{parse_osm_with, synthetic, RoadIndex, RoadStructure};
use pgeval::scenario::{self, ClusteredScenarioSet, SynthKind};
use pgeval::Error;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Open { .. } | Error::Write { .. } => PyIOError::new_err(e.to_string()),
        Error::UnknownScenario { .. } => PyKeyError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

type Track = (String, Vec<(f64, f64)>);

fn points(xy: Vec<(f64, f64)>) -> Vec<Point2> {
    xy.into_iter().map(|(x, y)| Point2::new(x, y)).collect()
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// Rigid 2-D pose; `theta` is normalized to [0, 2*pi).
#[pyclass(name = "Pose", frozen, eq, from_py_object)]
#[derive(Clone, Copy, PartialEq)]
pub struct PyPose(Pose);

#[pymethods]
impl PyPose {
    #[new]
    #[pyo3(signature = (tx=0.0, ty=0.0, theta=0.0))]
    fn new(tx: f64, ty: f64, theta: f64) -> Self {
        PyPose(Pose::new(tx, ty, theta))
    }

    #[getter]
    fn tx(&self) -> f64 {
        self.0.tx
    }

    #[getter]
    fn ty(&self) -> f64 {
        self.0.ty
    }

    #[getter]
    fn theta(&self) -> f64 {
        self.0.theta
    }

    fn apply(&self, x: f64, y: f64) -> (f64, f64) {
        let p = self.0.apply(Point2::new(x, y));
        (p.x, p.y)
    }

    fn inverse(&self) -> Self {
        PyPose(self.0.inverse())
    }

    fn __repr__(&self) -> String {
        format!("Pose(tx={}, ty={}, theta={})", self.0.tx, self.0.ty, self.0.theta)
    }
}

/// Filter settings. Keyword names follow the Rust field names.
#[pyclass(name = "FilterParams", from_py_object)]
#[derive(Clone)]
pub struct PyFilterParams {
    #[pyo3(get, set)]
    n_particles: usize,
    #[pyo3(get, set)]
    sigma_xy: f64,
    #[pyo3(get, set)]
    sigma_theta: f64,
    #[pyo3(get, set)]
    rho_r: f64,
    #[pyo3(get, set)]
    rho_c: f64,
    #[pyo3(get, set)]
    q_tilde: f64,
    #[pyo3(get, set)]
    t_max: usize,
    #[pyo3(get, set)]
    q_d: f64,
    #[pyo3(get, set)]
    lambda0: f64,
    #[pyo3(get, set)]
    alpha_decay: f64,
    #[pyo3(get, set)]
    seed: u64,
}

impl PyFilterParams {
    fn core(&self) -> placement::FilterParams {
        placement::FilterParams {
            n_particles: self.n_particles,
            sigma_xy: self.sigma_xy,
            sigma_theta: self.sigma_theta,
            rho_r: self.rho_r,
            rho_c: self.rho_c,
            q_tilde: self.q_tilde,
            t_max: self.t_max,
            q_d: self.q_d,
            lambda0: self.lambda0,
            alpha_decay: self.alpha_decay,
            seed: self.seed,
        }
    }
}

fn resolve(params: Option<PyFilterParams>) -> placement::FilterParams {
    params.map(|p| p.core()).unwrap_or_default()
}

#[pymethods]
impl PyFilterParams {
    #[new]
    #[pyo3(signature = (n_particles=500, sigma_xy=8.0, sigma_theta=std::f64::consts::FRAC_PI_2, rho_r=0.6,
                        rho_c=0.8, q_tilde=0.9, t_max=300, q_d=0.5, lambda0=1e-3, alpha_decay=5e-6, seed=0))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        n_particles: usize,
        sigma_xy: f64,
        sigma_theta: f64,
        rho_r: f64,
        rho_c: f64,
        q_tilde: f64,
        t_max: usize,
        q_d: f64,
        lambda0: f64,
        alpha_decay: f64,
        seed: u64,
    ) -> PyResult<Self> {
        let p = Self {
            n_particles,
            sigma_xy,
            sigma_theta,
            rho_r,
            rho_c,
            q_tilde,
            t_max,
            q_d,
            lambda0,
            alpha_decay,
            seed,
        };
        p.core().validate().map_err(to_py)?;
        Ok(p)
    }

    fn decay_factor(&self, t: usize, q_star: f64) -> f64 {
        placement::decay_factor(t, q_star, &self.core())
    }
}

/// A road map together with its occupancy grid and nearest-road index.
#[pyclass(name = "RoadNetwork", frozen)]
pub struct PyRoadNetwork {
    map: RoadStructure,
    road: RoadIndex,
}

impl PyRoadNetwork {
    fn wrap(map: RoadStructure, grid_m: f64) -> PyResult<Self> {
        let road = RoadIndex::build(&map, grid_m).map_err(to_py)?;
        Ok(Self { map, road })
    }
}

#[pymethods]
impl PyRoadNetwork {
    #[staticmethod]
    #[pyo3(signature = (path, grid_m=2.0, resample_m=1.0))]
    fn from_osm(path: std::path::PathBuf, grid_m: f64, resample_m: f64) -> PyResult<Self> {
        let map = pgeval::cli::load_map(&path, None, resample_m).map_err(to_py)?;
        Self::wrap(map, grid_m)
    }

    #[staticmethod]
    #[pyo3(signature = (xml, grid_m=2.0, resample_m=1.0))]
    fn from_osm_string(xml: &str, grid_m: f64, resample_m: f64) -> PyResult<Self> {
        Self::wrap(parse_osm_with(xml.as_bytes(), resample_m).map_err(to_py)?, grid_m)
    }

    #[staticmethod]
    #[pyo3(signature = (name, roads, grid_m=2.0, resample_m=1.0))]
    fn from_polylines(name: &str, roads: Vec<Vec<(f64, f64)>>, grid_m: f64, resample_m: f64) -> PyResult<Self> {
        let lines: Vec<Vec<Point2>> = roads.into_iter().map(points).collect();
        Self::wrap(
            RoadStructure::from_polylines(name, &lines, resample_m).map_err(to_py)?,
            grid_m,
        )
    }

    #[staticmethod]
    #[pyo3(signature = (blocks=10, block_m=80.0, grid_m=2.0))]
    fn grid_city(blocks: usize, block_m: f64, grid_m: f64) -> PyResult<Self> {
        Self::wrap(synthetic::grid_city(blocks, block_m).map_err(to_py)?, grid_m)
    }

    #[staticmethod]
    #[pyo3(signature = (count, spacing_m, length_m, grid_m=2.0))]
    fn parallel_roads(count: usize, spacing_m: f64, length_m: f64, grid_m: f64) -> PyResult<Self> {
        Self::wrap(
            synthetic::parallel_roads(count, spacing_m, length_m).map_err(to_py)?,
            grid_m,
        )
    }

    #[getter]
    fn name(&self) -> String {
        self.map.name.clone()
    }

    #[getter]
    fn area_acres(&self) -> Option<f64> {
        self.map.area_acres
    }

    #[getter]
    fn n_roads(&self) -> usize {
        self.map.roads.len()
    }

    #[getter]
    fn n_cells(&self) -> usize {
        self.road.grid.occupied.len()
    }

    fn cell_of(&self, x: f64, y: f64) -> (i64, i64) {
        self.road.spec().cell_of(Point2::new(x, y))
    }

    fn is_occupied(&self, cell: (i64, i64)) -> bool {
        self.road.grid.is_occupied(cell)
    }

    /// Closest occupied cell; ties go to the lexicographically smallest.
    fn nearest_cell(&self, cell: (i64, i64)) -> (i64, i64) {
        pgeval::roadnet::nearest_road_cell(&self.road.nearest, cell)
    }

    fn __repr__(&self) -> String {
        format!(
            "RoadNetwork(name={:?}, roads={}, cells={})",
            self.map.name,
            self.n_roads(),
            self.n_cells()
        )
    }
}

/// Validated scenarios grouped by category.
#[pyclass(name = "ScenarioSet", frozen)]
pub struct PyScenarioSet {
    set: ClusteredScenarioSet,
    rejected: Vec<(String, Vec<String>)>,
    warnings: Vec<String>,
}

impl PyScenarioSet {
    fn from_document(doc: &[u8], resample_m: f64) -> PyResult<Self> {
        let loaded = scenario::load_scenarios_with(doc, resample_m).map_err(to_py)?;
        Ok(Self {
            set: loaded.set,
            rejected: loaded
                .rejected
                .into_iter()
                .map(|r| (r.id, r.diagnostics.iter().map(ToString::to_string).collect()))
                .collect(),
            warnings: loaded.warnings,
        })
    }

    fn get(&self, id: &str) -> PyResult<&scenario::Scenario> {
        self.set.find(id).ok_or_else(|| {
            let ids: Vec<&str> = self.set.iter().map(|z| z.id.as_str()).collect();
            to_py(Error::UnknownScenario {
                id: id.to_string(),
                available: ids.join(", "),
            })
        })
    }
}

#[pymethods]
impl PyScenarioSet {
    #[staticmethod]
    #[pyo3(signature = (path, resample_m=1.0))]
    fn load(path: std::path::PathBuf, resample_m: f64) -> PyResult<Self> {
        let bytes = std::fs::read(&path).map_err(|source| to_py(Error::Open { path, source }))?;
        Self::from_document(&bytes, resample_m)
    }

    #[staticmethod]
    #[pyo3(signature = (text, resample_m=1.0))]
    fn from_json(text: &str, resample_m: f64) -> PyResult<Self> {
        Self::from_document(text.as_bytes(), resample_m)
    }

    fn ids(&self) -> Vec<String> {
        self.set.iter().map(|z| z.id.clone()).collect()
    }

    /// Number of scenarios per category, including empty categories.
    fn categories(&self) -> Vec<(u32, usize)> {
        self.set.clusters.iter().map(|(k, v)| (*k, v.len())).collect()
    }

    #[getter]
    fn rejected(&self) -> Vec<(String, Vec<String>)> {
        self.rejected.clone()
    }

    #[getter]
    fn warnings(&self) -> Vec<String> {
        self.warnings.clone()
    }

    /// Trajectories of one scenario as lists of (x, y).
    fn trajectories(&self, id: &str) -> PyResult<Vec<Track>> {
        Ok(self
            .get(id)?
            .vehicles
            .iter()
            .map(|v| (v.vehicle_id.clone(), v.points.iter().map(|p| (p.x, p.y)).collect()))
            .collect())
    }

    fn to_json(&self) -> String {
        scenario::scenarios_to_json(self.set.iter())
    }

    fn __len__(&self) -> usize {
        self.set.len()
    }
}

/// Builds one synthetic scenario; returns its JSON document and the planted pose when known.
#[pyfunction]
#[pyo3(signature = (network, kind, length_m, seed, offset_m=4.0))]
fn synthesize(
    network: &PyRoadNetwork,
    kind: &str,
    length_m: f64,
    seed: u64,
    offset_m: f64,
) -> PyResult<(String, Option<PyPose>)> {
    let kind = match kind {
        "on-road-path" => SynthKind::OnRoadPath,
        "two-crossing" => SynthKind::TwoCrossing,
        "two-parallel" => SynthKind::TwoParallel { offset_m },
        other => {
            return Err(PyValueError::new_err(format!(
                "unknown kind {other:?}; expected on-road-path, two-crossing or two-parallel"
            )))
        }
    };
    let s = scenario::synthesize_scenario(&network.map, kind, length_m, seed).map_err(to_py)?;
    Ok((scenario::scenarios_to_json([&s.scenario]), s.planted.map(PyPose)))
}

/// DTW distance and warping path. `radius=None` runs the full computation.
#[pyfunction]
#[pyo3(signature = (x, y, radius=None))]
fn fast_dtw(x: Vec<(f64, f64)>, y: Vec<(f64, f64)>, radius: Option<usize>) -> PyResult<(f64, Vec<(usize, usize)>)> {
    let r = dtw::dtw_fast(&points(x), &points(y), radius).map_err(to_py)?;
    Ok((r.distance, r.path.0))
}

#[pyfunction]
fn dtw_exact(x: Vec<(f64, f64)>, y: Vec<(f64, f64)>) -> PyResult<(f64, Vec<(usize, usize)>)> {
    let r = dtw::dtw_exact(&points(x), &points(y)).map_err(to_py)?;
    Ok((r.distance, r.path.0))
}

/// Feasibility of a single trajectory placed at `pose`.
#[pyfunction]
fn feasibility(network: &PyRoadNetwork, pose: &PyPose, trajectory: Vec<(f64, f64)>) -> f64 {
    placement::dtw_feasibility(&points(trajectory), &pose.0, &network.road)
}

/// Mean feasibility over the vehicles of scenario `id`.
#[pyfunction]
fn likelihood(network: &PyRoadNetwork, pose: &PyPose, scenarios: &PyScenarioSet, id: &str) -> PyResult<f64> {
    Ok(placement::likelihood(&network.road, &pose.0, scenarios.get(id)?))
}

/// Runs the placement filter on one scenario; returns a dict including the trace.
#[pyfunction]
#[pyo3(signature = (network, scenarios, id, params=None))]
fn place<'py>(
    py: Python<'py>,
    network: &PyRoadNetwork,
    scenarios: &PyScenarioSet,
    id: &str,
    params: Option<PyFilterParams>,
) -> PyResult<Bound<'py, PyAny>> {
    let z = scenarios.get(id)?;
    let params = resolve(params);
    let result = py
        .detach(|| compute_single_scenario(z, &network.road, &params))
        .map_err(to_py)?;
    let text = serde_json::to_string(&result).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &text)
}

/// Places every scenario and returns the effectiveness report as a dict.
#[pyfunction]
#[pyo3(signature = (network, scenarios, params=None, reference=None))]
fn evaluate<'py>(
    py: Python<'py>,
    network: &PyRoadNetwork,
    scenarios: &PyScenarioSet,
    params: Option<PyFilterParams>,
    reference: Option<(f64, f64)>,
) -> PyResult<Bound<'py, PyAny>> {
    let params = resolve(params);
    let mut report = py
        .detach(|| baseline_effectiveness(&scenarios.set, &network.road, &params))
        .map_err(to_py)?;
    report
        .set_land_efficiency(network.map.area_acres, reference)
        .map_err(to_py)?;
    let text = serde_json::to_string(&report).map_err(|e| PyValueError::new_err(e.to_string()))?;
    json_to_py(py, &text)
}

#[pyfunction]
fn land_efficiency(
    coverage: f64,
    area_acres: f64,
    reference_coverage: f64,
    reference_area_acres: f64,
) -> PyResult<f64> {
    bench::land_efficiency(coverage, area_acres, (reference_coverage, reference_area_acres)).map_err(to_py)
}

#[pymodule]
#[pyo3(name = "pgeval")]
fn pgeval_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyPose>()?;
    m.add_class::<PyFilterParams>()?;
    m.add_class::<PyRoadNetwork>()?;
    m.add_class::<PyScenarioSet>()?;
    m.add_function(wrap_pyfunction!(synthesize, m)?)?;
    m.add_function(wrap_pyfunction!(fast_dtw, m)?)?;
    m.add_function(wrap_pyfunction!(dtw_exact, m)?)?;
    m.add_function(wrap_pyfunction!(feasibility, m)?)?;
    m.add_function(wrap_pyfunction!(likelihood, m)?)?;
    m.add_function(wrap_pyfunction!(place, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(land_efficiency, m)?)?;
    Ok(())
}
