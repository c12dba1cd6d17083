//! Command-line front end: `evaluate`, `place`, `sweep`, `synth` and
//! `synth-map`.
//!
//! Effective settings are layered as built-in defaults, then an optional
//! `key = value` config file, then command-line flags.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bench::{baseline_effectiveness, placements_geojson, EffectivenessReport};
use crate::error::{Error, Result};
use crate::geo::{LatLon, Pose};
use crate::placement::{compute_single_scenario, stage_rng, FilterParams};
use crate::roadnet::{parse_osm_with, synthetic, write_osm, MapMetadata, RoadIndex, RoadStructure};
use crate::scenario::{load_scenarios_with, scenarios_to_json, synthesize_scenario, ClusteredScenarioSet, SynthKind};

/// Every tunable of a run. Field names double as config-file keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub n_particles: usize,
    pub sigma_xy: f64,
    pub sigma_theta: f64,
    pub rho_r: f64,
    pub rho_c: f64,
    pub q_tilde: f64,
    pub t_max: usize,
    pub q_d: f64,
    pub lambda0: f64,
    pub alpha_decay: f64,
    pub grid_m: f64,
    pub resample_m: f64,
    pub master_seed: u64,
    pub jobs: Option<usize>,
    pub report: Option<PathBuf>,
    pub geojson: Option<PathBuf>,
    pub trace: Option<PathBuf>,
    pub reference_coverage: Option<f64>,
    pub reference_area_acres: Option<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = FilterParams::default();
        Self {
            n_particles: p.n_particles,
            sigma_xy: p.sigma_xy,
            sigma_theta: p.sigma_theta,
            rho_r: p.rho_r,
            rho_c: p.rho_c,
            q_tilde: p.q_tilde,
            t_max: p.t_max,
            q_d: p.q_d,
            lambda0: p.lambda0,
            alpha_decay: p.alpha_decay,
            grid_m: 2.0,
            resample_m: 1.0,
            master_seed: p.seed,
            jobs: None,
            report: None,
            geojson: None,
            trace: None,
            reference_coverage: None,
            reference_area_acres: None,
        }
    }
}

impl RunConfig {
    pub fn params(&self) -> FilterParams {
        FilterParams {
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
            seed: self.master_seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params().validate()?;
        if !(self.grid_m > 0.0 && self.grid_m.is_finite()) {
            return Err(Error::Config("grid_m must be positive".into()));
        }
        if !(self.resample_m > 0.0 && self.resample_m.is_finite()) {
            return Err(Error::Config("resample_m must be positive".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. Unknown keys are errors.
    pub fn merge_file_text(&mut self, text: &str) -> Result<()> {
        let mut current = match serde_json::to_value(&*self)? {
            serde_json::Value::Object(m) => m,
            _ => unreachable!("RunConfig serializes to an object"),
        };
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config(format!("line {}: expected key = value", lineno + 1)));
            };
            let key = key.trim();
            let value = value.trim();
            let Some(slot) = current.get_mut(key) else {
                return Err(Error::Config(format!("line {}: unknown key {key:?}", lineno + 1)));
            };
            *slot = match key {
                "report" | "geojson" | "trace" => serde_json::Value::String(value.to_string()),
                _ => serde_json::from_str(value)
                    .map_err(|_| Error::Config(format!("line {}: bad value {value:?} for {key}", lineno + 1)))?,
            };
        }
        *self = serde_json::from_value(serde_json::Value::Object(current))
            .map_err(|e| Error::Config(format!("config file: {e}")))?;
        Ok(())
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pgeval",
    version,
    about = "Evaluate proving-ground road networks against driving scenarios"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Place every scenario and report per-category effectiveness and coverage.
    Evaluate(EvaluateArgs),
    /// Place one scenario and write its per-iteration trace.
    Place(PlaceArgs),
    /// Coverage as a function of particle count.
    Sweep(SweepArgs),
    /// Write a file of synthesized scenarios.
    Synth(SynthArgs),
    /// Write a synthetic proving ground as OSM XML.
    SynthMap(SynthMapArgs),
}

#[derive(Debug, Args, Default)]
pub struct Overrides {
    /// Config file with `key = value` lines.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Particles per scenario.
    #[arg(long = "particles")]
    pub n_particles: Option<usize>,
    /// Translation diffusion std-dev, meters.
    #[arg(long)]
    pub sigma_xy: Option<f64>,
    /// Heading diffusion std-dev, radians.
    #[arg(long)]
    pub sigma_theta: Option<f64>,
    /// Fraction of particles preserved each iteration.
    #[arg(long)]
    pub rho_r: Option<f64>,
    /// Convergence ratio of mean to best weight.
    #[arg(long)]
    pub rho_c: Option<f64>,
    /// Early-stop compatibility threshold.
    #[arg(long)]
    pub q_tilde: Option<f64>,
    /// Iteration cap.
    #[arg(long)]
    pub t_max: Option<usize>,
    /// Compatibility above which diffusion also shrinks with q*.
    #[arg(long)]
    pub q_d: Option<f64>,
    /// Time decay rate: gamma includes 1 / (1 + lambda0 t^2).
    #[arg(long)]
    pub lambda0: Option<f64>,
    /// Base of the compatibility decay alpha^(q* - q_d).
    #[arg(long)]
    pub alpha_decay: Option<f64>,
    /// Occupancy grid cell size, meters.
    #[arg(long)]
    pub grid_m: Option<f64>,
    /// Polyline resampling spacing, meters.
    #[arg(long)]
    pub resample_m: Option<f64>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Cap on worker threads.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Map metadata sidecar (defaults to `<map>.meta` when present).
    #[arg(long)]
    pub map_meta: Option<PathBuf>,
}

impl Overrides {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.merge_file_text(&read_text(path)?)?;
        }
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {
                $(if let Some(v) = self.$flag { cfg.$field = v; })*
            };
        }
        set!(n_particles => n_particles, sigma_xy => sigma_xy, sigma_theta => sigma_theta,
             rho_r => rho_r, rho_c => rho_c, q_tilde => q_tilde, t_max => t_max, q_d => q_d,
             lambda0 => lambda0, alpha_decay => alpha_decay, grid_m => grid_m,
             resample_m => resample_m, seed => master_seed);
        if self.jobs.is_some() {
            cfg.jobs = self.jobs;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    pub map: PathBuf,
    pub scenarios: PathBuf,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Report JSON path.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Optional GeoJSON of best placements.
    #[arg(long)]
    pub geojson: Option<PathBuf>,
    /// Reference facility coverage for land efficiency.
    #[arg(long)]
    pub reference_coverage: Option<f64>,
    /// Reference facility area in acres for land efficiency.
    #[arg(long)]
    pub reference_area: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PlaceArgs {
    pub map: PathBuf,
    pub scenarios: PathBuf,
    pub scenario_id: String,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Trace CSV path.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    pub map: PathBuf,
    pub scenarios: PathBuf,
    /// Particle counts to compare, e.g. `100,200,400`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub counts: Vec<usize>,
    /// Size of the random scenario subset (default: up to 50).
    #[arg(long)]
    pub subset: Option<usize>,
    #[command(flatten)]
    pub overrides: Overrides,
    /// Optional CSV copy of the table.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum KindArg {
    OnRoadPath,
    TwoCrossing,
    TwoParallel,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    pub map: PathBuf,
    #[arg(long, value_enum)]
    pub kind: KindArg,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Shortest trajectory length, meters.
    #[arg(long, default_value_t = 30.0)]
    pub min_length: f64,
    /// Longest trajectory length, meters.
    #[arg(long, default_value_t = 80.0)]
    pub max_length: f64,
    /// Lateral gap of `two-parallel` scenarios, meters.
    #[arg(long, default_value_t = 4.0)]
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LayoutArg {
    GridCity,
    Parallel,
}

#[derive(Debug, Args)]
pub struct SynthMapArgs {
    #[arg(long, value_enum, default_value = "grid-city")]
    pub layout: LayoutArg,
    /// Blocks per side (grid city) or number of roads (parallel).
    #[arg(long, default_value_t = 10)]
    pub blocks: usize,
    /// Block side (grid city) or road spacing (parallel), meters.
    #[arg(long, default_value_t = 80.0)]
    pub block_m: f64,
    /// Road length for the parallel layout, meters.
    #[arg(long, default_value_t = 800.0)]
    pub length_m: f64,
    #[arg(long, default_value_t = 42.3)]
    pub lat: f64,
    #[arg(long, default_value_t = -83.7)]
    pub lon: f64,
    #[arg(long)]
    pub out: PathBuf,
}

/// Parses `args`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let mut stdout = std::io::stdout().lock();
    match run(cli, &mut stdout) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Open { .. } => 2,
                _ => 1,
            }
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::Evaluate(a) => cmd_evaluate(&a, out),
        Command::Place(a) => cmd_place(&a, out),
        Command::Sweep(a) => cmd_sweep(&a, out),
        Command::Synth(a) => cmd_synth(&a, out),
        Command::SynthMap(a) => cmd_synth_map(&a, out),
    }
}

fn read_bytes(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|source| Error::Open {
        path: path.to_path_buf(),
        source,
    })
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Open {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes through a sibling temp file and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let werr = |source| Error::Write {
        path: path.to_path_buf(),
        source,
    };
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, contents).map_err(werr)?;
    fs::rename(&tmp, path).map_err(werr)
}

fn with_context(path: &Path, e: Error) -> Error {
    match e {
        Error::Open { .. } | Error::Write { .. } => e,
        other => Error::Config(format!("{}: {other}", path.display())),
    }
}

/// Loads the OSM map plus its optional metadata sidecar.
pub fn load_map(path: &Path, meta: Option<&Path>, resample_m: f64) -> Result<RoadStructure> {
    let mut map = parse_osm_with(&read_bytes(path)?, resample_m).map_err(|e| with_context(path, e))?;
    map.name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let sidecar = match meta {
        Some(p) => Some(p.to_path_buf()),
        None => {
            let default = PathBuf::from(format!("{}.meta", path.display()));
            default.exists().then_some(default)
        }
    };
    if let Some(p) = sidecar {
        let meta = MapMetadata::parse(&read_text(&p)?).map_err(|e| with_context(&p, e))?;
        map.apply_metadata(&meta);
    }
    Ok(map)
}

fn load_set(path: &Path, resample_m: f64, out: &mut dyn Write) -> Result<ClusteredScenarioSet> {
    let loaded = load_scenarios_with(&read_bytes(path)?, resample_m).map_err(|e| with_context(path, e))?;
    for r in &loaded.rejected {
        let msgs: Vec<String> = r.diagnostics.iter().map(ToString::to_string).collect();
        let _ = writeln!(out, "rejected scenario {}: {}", r.id, msgs.join("; "));
    }
    for w in &loaded.warnings {
        let _ = writeln!(out, "warning: {w}");
    }
    Ok(loaded.set)
}

fn with_pool<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match jobs {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Report file: the effective config followed by the report fields.
#[derive(Debug, Serialize, Deserialize)]
pub struct ReportFile {
    pub config: RunConfig,
    #[serde(flatten)]
    pub report: EffectivenessReport,
}

pub fn cmd_evaluate(a: &EvaluateArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = a.overrides.resolve()?;
    if a.report.is_some() {
        cfg.report = a.report.clone();
    }
    if a.geojson.is_some() {
        cfg.geojson = a.geojson.clone();
    }
    if a.reference_coverage.is_some() {
        cfg.reference_coverage = a.reference_coverage;
    }
    if a.reference_area.is_some() {
        cfg.reference_area_acres = a.reference_area;
    }
    let report_path = cfg.report.clone().unwrap_or_else(|| PathBuf::from("report.json"));

    let map = load_map(&a.map, a.overrides.map_meta.as_deref(), cfg.resample_m)?;
    let set = load_set(&a.scenarios, cfg.resample_m, out)?;
    let road = RoadIndex::build(&map, cfg.grid_m)?;
    let params = cfg.params();
    let mut report = with_pool(cfg.jobs, || baseline_effectiveness(&set, &road, &params))??;
    let reference = cfg.reference_coverage.zip(cfg.reference_area_acres);
    report.set_land_efficiency(map.area_acres, reference)?;

    let _ = write!(out, "{}", format_report(&report));
    if let Some(path) = &cfg.geojson {
        let gj = placements_geojson(&report, &set, &road);
        write_atomic(path, (serde_json::to_string_pretty(&gj)? + "\n").as_bytes())?;
    }
    let file = ReportFile { config: cfg, report };
    write_atomic(&report_path, (serde_json::to_string_pretty(&file)? + "\n").as_bytes())?;
    let _ = writeln!(out, "report written to {}", report_path.display());
    Ok(())
}

pub fn format_report(r: &EffectivenessReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "map: {}", r.map_name);
    let _ = writeln!(s, "{:>8}  {:>8}  {:>6}", "category", "E_k", "count");
    for (k, c) in &r.per_category {
        let e = c
            .effectiveness
            .map_or_else(|| "absent".to_string(), |v| format!("{v:.4}"));
        let _ = writeln!(s, "{k:>8}  {e:>8}  {:>6}", c.count);
    }
    let _ = writeln!(s, "coverage: {:.4}", r.coverage);
    if let Some(m) = r.coverage_by_category_mean {
        let _ = writeln!(s, "coverage (category mean): {m:.4}");
    }
    if let Some(le) = r.land_efficiency {
        let _ = writeln!(s, "land efficiency: {le:.4}");
    }
    s
}

pub fn cmd_place(a: &PlaceArgs, out: &mut dyn Write) -> Result<()> {
    let mut cfg = a.overrides.resolve()?;
    if a.trace.is_some() {
        cfg.trace = a.trace.clone();
    }
    let trace_path = cfg.trace.clone().unwrap_or_else(|| PathBuf::from("trace.csv"));
    let map = load_map(&a.map, a.overrides.map_meta.as_deref(), cfg.resample_m)?;
    let set = load_set(&a.scenarios, cfg.resample_m, out)?;
    let Some(z) = set.find(&a.scenario_id) else {
        let ids: Vec<&str> = set.iter().map(|z| z.id.as_str()).collect();
        return Err(Error::UnknownScenario {
            id: a.scenario_id.clone(),
            available: ids.join(", "),
        });
    };
    let road = RoadIndex::build(&map, cfg.grid_m)?;
    let params = cfg.params();
    let result = with_pool(cfg.jobs, || compute_single_scenario(z, &road, &params))??;

    let p = result.best_pose;
    let _ = writeln!(out, "scenario: {}", result.scenario_id);
    let _ = writeln!(out, "best pose: tx={:.3} ty={:.3} theta={:.5}", p.tx, p.ty, p.theta);
    let _ = writeln!(out, "compatibility: {:.4}", result.compatibility);
    let _ = writeln!(out, "iterations: {}", result.iterations);
    let _ = writeln!(out, "termination: {}", result.termination.as_str());

    let mut csv = String::from("t,q_star,q_mean,gamma\n");
    for row in &result.trace {
        let _ = writeln!(csv, "{},{},{},{}", row.t, row.q_star, row.q_mean, row.gamma);
    }
    write_atomic(&trace_path, csv.as_bytes())?;
    let _ = writeln!(out, "trace written to {}", trace_path.display());
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n_particles: usize,
    pub coverage: f64,
    /// `|coverage - previous| / previous`; absent for the first row.
    pub rel_change: Option<f64>,
    pub stable: bool,
}

pub fn sweep_table(
    set: &ClusteredScenarioSet,
    road: &RoadIndex,
    cfg: &RunConfig,
    counts: &[usize],
    subset: Option<usize>,
) -> Result<Vec<SweepRow>> {
    if counts.len() < 2 {
        return Err(Error::Parameter("sweep needs at least two particle counts".into()));
    }
    let all: Vec<_> = set.iter().cloned().collect();
    let k = subset.unwrap_or(50).min(all.len()).max(1);
    let mut rng = stage_rng(cfg.master_seed, u64::MAX);
    let mut picked: Vec<usize> = sample(&mut rng, all.len(), k).into_vec();
    picked.sort_unstable();
    let sub = ClusteredScenarioSet::from_scenarios(picked.into_iter().map(|i| all[i].clone()).collect());

    let mut rows: Vec<SweepRow> = Vec::with_capacity(counts.len());
    let mut flagged = false;
    for &n in counts {
        let params = FilterParams {
            n_particles: n,
            ..cfg.params()
        };
        let report = baseline_effectiveness(&sub, road, &params)?;
        let rel_change = rows
            .last()
            .map(|prev| (report.coverage - prev.coverage).abs() / prev.coverage.max(f64::MIN_POSITIVE));
        let stable = !flagged && rel_change.is_some_and(|c| c < 0.01);
        flagged |= stable;
        rows.push(SweepRow {
            n_particles: n,
            coverage: report.coverage,
            rel_change,
            stable,
        });
    }
    Ok(rows)
}

pub fn cmd_sweep(a: &SweepArgs, out: &mut dyn Write) -> Result<()> {
    let cfg = a.overrides.resolve()?;
    if a.counts.len() < 2 {
        return Err(Error::Parameter("sweep needs at least two particle counts".into()));
    }
    let map = load_map(&a.map, a.overrides.map_meta.as_deref(), cfg.resample_m)?;
    let set = load_set(&a.scenarios, cfg.resample_m, out)?;
    let road = RoadIndex::build(&map, cfg.grid_m)?;
    let rows = with_pool(cfg.jobs, || sweep_table(&set, &road, &cfg, &a.counts, a.subset))??;

    let mut csv = String::from("n_particles,coverage,rel_change,stable\n");
    let _ = writeln!(
        out,
        "{:>11}  {:>8}  {:>10}  stable",
        "n_particles", "coverage", "rel_change"
    );
    for r in &rows {
        let change = r.rel_change.map_or_else(|| "-".to_string(), |c| format!("{c:.4}"));
        let mark = if r.stable { "*" } else { "" };
        let _ = writeln!(out, "{:>11}  {:>8.4}  {change:>10}  {mark}", r.n_particles, r.coverage);
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            r.n_particles,
            r.coverage,
            r.rel_change.map_or_else(String::new, |c| c.to_string()),
            r.stable
        );
    }
    if let Some(path) = &a.out {
        write_atomic(path, csv.as_bytes())?;
    }
    Ok(())
}

pub fn cmd_synth(a: &SynthArgs, out: &mut dyn Write) -> Result<()> {
    if !(a.min_length <= a.max_length) {
        return Err(Error::Parameter("min-length must not exceed max-length".into()));
    }
    let map = load_map(&a.map, None, 1.0)?;
    let kind = match a.kind {
        KindArg::OnRoadPath => SynthKind::OnRoadPath,
        KindArg::TwoCrossing => SynthKind::TwoCrossing,
        KindArg::TwoParallel => SynthKind::TwoParallel { offset_m: a.offset },
    };
    let mut lengths = stage_rng(a.seed, 0);
    let mut scenarios = Vec::with_capacity(a.count);
    let mut planted: BTreeMap<String, Pose> = BTreeMap::new();
    for i in 0..a.count {
        let length = if a.min_length == a.max_length {
            a.min_length
        } else {
            lengths.random_range(a.min_length..=a.max_length)
        };
        let seed = a.seed.wrapping_mul(1_000_003).wrapping_add(i as u64);
        let s = synthesize_scenario(&map, kind, length, seed)?;
        if let Some(p) = s.planted {
            planted.insert(s.scenario.id.clone(), p);
        }
        scenarios.push(s.scenario);
    }
    write_atomic(&a.out, scenarios_to_json(&scenarios).as_bytes())?;
    if !planted.is_empty() {
        let sidecar = PathBuf::from(format!("{}.planted.json", a.out.display()));
        write_atomic(&sidecar, (serde_json::to_string_pretty(&planted)? + "\n").as_bytes())?;
    }
    let _ = writeln!(
        out,
        "wrote {} {} scenarios to {}",
        scenarios.len(),
        kind.name(),
        a.out.display()
    );
    Ok(())
}

pub fn cmd_synth_map(a: &SynthMapArgs, out: &mut dyn Write) -> Result<()> {
    if a.blocks == 0 || !(a.block_m > 0.0) {
        return Err(Error::Parameter("blocks and block-m must be positive".into()));
    }
    let (lines, name, area_m2) = match a.layout {
        LayoutArg::GridCity => (
            synthetic::grid_city_polylines(a.blocks, a.block_m),
            format!("grid-city-{}x{}", a.blocks, a.blocks),
            (a.blocks as f64 * a.block_m).powi(2),
        ),
        LayoutArg::Parallel => (
            synthetic::parallel_roads_polylines(a.blocks, a.block_m, a.length_m),
            format!("parallel-{}", a.blocks),
            (a.blocks.max(2) - 1) as f64 * a.block_m * a.length_m,
        ),
    };
    let xml = write_osm(&lines, LatLon::new(a.lat, a.lon));
    write_atomic(&a.out, xml.as_bytes())?;
    let meta = format!(
        "name = {name}\narea_acres = {}\n",
        synthetic::square_m_to_acres(area_m2)
    );
    write_atomic(&PathBuf::from(format!("{}.meta", a.out.display())), meta.as_bytes())?;
    let _ = writeln!(out, "wrote {name} to {}", a.out.display());
    Ok(())
}
