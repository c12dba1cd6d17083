//! Scenario-to-map likelihood and the partially-resampling bootstrap filter
//! that searches for the best placement of one scenario.

use std::f64::consts::{FRAC_PI_2, TAU};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dtw::dtw_distance;
use crate::error::{Error, Result};
use crate::geo::{Point2, Pose};
use crate::roadnet::{rasterize, Cell, NearestRoadIndex, RoadIndex};
use crate::scenario::{validate_scenario, Scenario};

/// Filter hyperparameters. Defaults are the published experiment settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FilterParams {
    pub n_particles: usize,
    /// Diffusion standard deviation along x and y, meters.
    pub sigma_xy: f64,
    /// Diffusion standard deviation of the heading, radians.
    pub sigma_theta: f64,
    /// Fraction of lowest-weight proposals resampled each iteration.
    pub rho_r: f64,
    /// Convergence ratio of mean weight to best weight.
    pub rho_c: f64,
    /// Best-weight threshold that stops the search.
    pub q_tilde: f64,
    pub t_max: usize,
    /// Best weight above which diffusion decays exponentially.
    pub q_d: f64,
    /// Polynomial decay rate of the diffusion.
    pub lambda0: f64,
    /// Base of the exponential diffusion decay.
    pub alpha_decay: f64,
    pub seed: u64,
}

impl Default for FilterParams {
    fn default() -> Self {
        Self {
            n_particles: 500,
            sigma_xy: 8.0,
            sigma_theta: FRAC_PI_2,
            rho_r: 0.6,
            rho_c: 0.8,
            q_tilde: 0.9,
            t_max: 300,
            q_d: 0.5,
            lambda0: 1e-3,
            alpha_decay: 5e-6,
            seed: 0,
        }
    }
}

impl FilterParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Parameter(what.to_string()));
        let open01 = |v: f64| v > 0.0 && v < 1.0;
        if self.n_particles < 2 {
            return bad("n_particles must be at least 2");
        }
        if !(self.sigma_xy >= 0.0 && self.sigma_xy.is_finite()) {
            return bad("sigma_xy must be finite and non-negative");
        }
        if !(self.sigma_theta >= 0.0 && self.sigma_theta.is_finite()) {
            return bad("sigma_theta must be finite and non-negative");
        }
        if !open01(self.rho_r) {
            return bad("rho_r must lie in (0, 1)");
        }
        if !open01(self.rho_c) {
            return bad("rho_c must lie in (0, 1)");
        }
        if !(self.q_tilde > 0.0 && self.q_tilde <= 1.0) {
            return bad("q_tilde must lie in (0, 1]");
        }
        if self.t_max < 1 {
            return bad("t_max must be at least 1");
        }
        if !open01(self.q_d) {
            return bad("q_d must lie in (0, 1)");
        }
        if !(self.lambda0 >= 0.0 && self.lambda0.is_finite()) {
            return bad("lambda0 must be finite and non-negative");
        }
        if !(self.alpha_decay > 0.0 && self.alpha_decay.is_finite()) {
            return bad("alpha_decay must be positive");
        }
        Ok(())
    }

    /// Number of low-weight slots replaced each iteration, `floor(rho_r * N)`.
    pub fn n_resampled(&self) -> usize {
        // The epsilon keeps products like 0.6 * 10 from flooring to 5.
        ((self.rho_r * self.n_particles as f64) + 1e-9).floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub pose: Pose,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSet {
    /// Sorted by ascending weight in the preserved block.
    pub particles: Vec<Particle>,
    pub best: Particle,
    pub mean_weight: f64,
    pub iteration: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    MaxIters,
    WeightThreshold,
    Converged,
}

impl Termination {
    pub fn as_str(&self) -> &'static str {
        match self {
            Termination::MaxIters => "max_iters",
            Termination::WeightThreshold => "weight_threshold",
            Termination::Converged => "converged",
        }
    }
}

/// One filter iteration: decay factor used for diffusion, then best-ever
/// and mean weight after the update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub t: usize,
    pub q_star: f64,
    pub q_mean: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlacementResult {
    pub scenario_id: String,
    pub best_pose: Pose,
    pub compatibility: f64,
    pub iterations: usize,
    pub termination: Termination,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub trace: Vec<TraceRow>,
}

/// Nearest road cell for every trajectory cell.
pub fn matching_segment(traj_cells: &[Cell], index: &NearestRoadIndex) -> Vec<Cell> {
    traj_cells.iter().map(|&c| index.nearest(c)).collect()
}

fn cells_as_points(cells: &[Cell]) -> Vec<Point2> {
    cells.iter().map(|&(x, y)| Point2::new(x as f64, y as f64)).collect()
}

/// Fraction of a placed trajectory that its matching road segment explains:
/// `max(0, 1 - DTW(cells, matched) / |cells|)`, distances in cell units.
pub fn dtw_feasibility(points: &[Point2], pose: &Pose, road: &RoadIndex) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let placed: Vec<Point2> = points.iter().map(|p| pose.apply(*p)).collect();
    let cells = rasterize(&placed, road.spec());
    let matched = matching_segment(&cells, &road.nearest);
    if cells == matched {
        return 1.0;
    }
    // Unconstrained FastDTW is the full dynamic program.
    let distance = dtw_distance(&cells_as_points(&cells), &cells_as_points(&matched)).expect("non-empty sequences");
    (1.0 - distance / cells.len() as f64).max(0.0)
}

/// Mean DTW feasibility of every vehicle under one shared pose.
pub fn likelihood(road: &RoadIndex, pose: &Pose, z: &Scenario) -> f64 {
    if z.vehicles.is_empty() {
        return 0.0;
    }
    let sum: f64 = z.vehicles.iter().map(|v| dtw_feasibility(&v.points, pose, road)).sum();
    sum / z.vehicles.len() as f64
}

/// Diffusion shrink factor at iteration `t` given the best weight so far.
pub fn decay_factor(t: usize, q_star: f64, params: &FilterParams) -> f64 {
    let t = t as f64;
    let natural = 1.0 / (1.0 + params.lambda0 * t * t);
    if q_star >= params.q_d {
        natural * params.alpha_decay.powf(q_star - params.q_d)
    } else {
        natural
    }
}

/// Gaussian random walk on every pose with standard deviations scaled by
/// `gamma`. Proposals may leave the map bounding box.
pub fn diffuse<R: Rng + ?Sized>(poses: &[Pose], gamma: f64, params: &FilterParams, rng: &mut R) -> Vec<Pose> {
    let nxy = Normal::new(0.0, gamma * params.sigma_xy).expect("finite std");
    let nth = Normal::new(0.0, gamma * params.sigma_theta).expect("finite std");
    poses
        .iter()
        .map(|p| {
            let dx = nxy.sample(rng);
            let dy = nxy.sample(rng);
            let dt = nth.sample(rng);
            Pose::new(p.tx + dx, p.ty + dy, p.theta + dt)
        })
        .collect()
}

/// Sorts proposals by ascending weight (ties by original index), redraws the
/// lowest `floor(rho_r * N)` slots from all proposals in proportion to
/// weight, and carries the rest over unchanged.
///
/// When every weight is zero the redraw is uniform.
pub fn partial_resample<R: Rng + ?Sized>(
    proposals: &[Pose],
    weights: &[f64],
    params: &FilterParams,
    rng: &mut R,
) -> Result<ParticleSet> {
    let n = proposals.len();
    if n == 0 || weights.len() != n {
        return Err(Error::Parameter(format!(
            "partial_resample needs equal, non-zero counts (got {} proposals, {} weights)",
            n,
            weights.len()
        )));
    }
    if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
        return Err(Error::Parameter("weights must be finite and non-negative".into()));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| weights[a].total_cmp(&weights[b]).then(a.cmp(&b)));
    let sorted: Vec<Particle> = order
        .iter()
        .map(|&i| Particle {
            pose: proposals[i],
            weight: weights[i],
        })
        .collect();

    let n_resampled = ((params.rho_r * n as f64) + 1e-9).floor() as usize;
    let n_resampled = n_resampled.min(n);
    let mut particles = Vec::with_capacity(n);
    let total: f64 = weights.iter().sum();
    if total > 0.0 {
        let dist = WeightedIndex::new(weights).expect("positive total weight");
        for _ in 0..n_resampled {
            let j = dist.sample(rng);
            particles.push(Particle {
                pose: proposals[j],
                weight: weights[j],
            });
        }
    } else {
        for _ in 0..n_resampled {
            let j = rng.random_range(0..n);
            particles.push(Particle {
                pose: proposals[j],
                weight: weights[j],
            });
        }
    }
    particles.extend_from_slice(&sorted[n_resampled..]);

    let best = *sorted.last().expect("non-empty");
    let mean_weight = particles.iter().map(|p| p.weight).sum::<f64>() / n as f64;
    Ok(ParticleSet {
        particles,
        best,
        mean_weight,
        iteration: 0,
    })
}

/// Deterministic RNG for one stage of a run: the master seed selects the
/// key and `stream` the ChaCha stream.
pub fn stage_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform initial poses: translation over the map bounding box, heading
/// over `[0, 2π)`.
pub fn initial_particles<R: Rng + ?Sized>(road: &RoadIndex, n: usize, rng: &mut R) -> Vec<Pose> {
    let b = road.bbox;
    (0..n)
        .map(|_| {
            let tx = rng.random_range(b.min.x..=b.max.x);
            let ty = rng.random_range(b.min.y..=b.max.y);
            let th = rng.random_range(0.0..TAU);
            Pose::new(tx, ty, th)
        })
        .collect()
}

/// Searches for the placement of `z` on the map that maximizes the
/// likelihood, returning the best pose seen over the whole run.
pub fn compute_single_scenario(z: &Scenario, road: &RoadIndex, params: &FilterParams) -> Result<PlacementResult> {
    params.validate()?;
    let diagnostics = validate_scenario(z);
    if !diagnostics.is_empty() {
        let msgs: Vec<String> = diagnostics.iter().map(ToString::to_string).collect();
        return Err(Error::Parameter(format!(
            "scenario {} is invalid: {}",
            z.id,
            msgs.join("; ")
        )));
    }

    let n = params.n_particles;
    let mut poses = initial_particles(road, n, &mut stage_rng(params.seed, 0));
    let mut best = Particle {
        pose: poses[0],
        weight: f64::NEG_INFINITY,
    };
    let mut trace = Vec::new();
    let mut t = 0usize;
    let termination = loop {
        let q_star = best.weight.max(0.0);
        let gamma = decay_factor(t, q_star, params);
        let mut rng = stage_rng(params.seed, t as u64 + 1);
        let proposals = diffuse(&poses, gamma, params, &mut rng);
        let weights: Vec<f64> = proposals.par_iter().map(|p| likelihood(road, p, z)).collect();
        let set = partial_resample(&proposals, &weights, params, &mut rng)?;
        if set.best.weight > best.weight {
            best = set.best;
        }
        t += 1;
        trace.push(TraceRow {
            t: t - 1,
            q_star: best.weight,
            q_mean: set.mean_weight,
            gamma,
        });
        poses = set.particles.iter().map(|p| p.pose).collect();

        if best.weight >= params.q_tilde {
            break Termination::WeightThreshold;
        }
        if best.weight > 0.0 && set.mean_weight >= params.rho_c * best.weight {
            break Termination::Converged;
        }
        if t >= params.t_max {
            break Termination::MaxIters;
        }
    };

    Ok(PlacementResult {
        scenario_id: z.id.clone(),
        best_pose: best.pose,
        compatibility: best.weight,
        iterations: t,
        termination,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::roadnet::{synthetic, RoadStructure};
    use crate::scenario::{synthesize_scenario, SynthKind, Trajectory};

    fn road(lines: &[Vec<Point2>]) -> RoadIndex {
        RoadIndex::build(&RoadStructure::from_polylines("t", lines, 1.0).unwrap(), 2.0).unwrap()
    }

    fn horizontal(len: f64) -> RoadIndex {
        road(&[vec![Point2::new(0.0, 0.0), Point2::new(len, 0.0)]])
    }

    fn scenario(vehicles: Vec<Vec<Point2>>) -> Scenario {
        Scenario {
            id: "z".into(),
            category: 1,
            vehicles: vehicles
                .into_iter()
                .enumerate()
                .map(|(i, points)| Trajectory {
                    vehicle_id: format!("v{i}"),
                    points,
                })
                .collect(),
        }
    }

    #[test]
    fn matching_segment_examples() {
        let r = horizontal(60.0);
        let on: Vec<Cell> = r.grid.occupied.iter().copied().take(10).collect();
        assert_eq!(matching_segment(&on, &r.nearest), on);
        let off: Vec<Cell> = on.iter().map(|&(x, y)| (x, y + 1)).collect();
        assert_eq!(matching_segment(&off, &r.nearest), on);
    }

    #[test]
    fn feasibility_exact_overlap_and_clamp() {
        let r = horizontal(60.0);
        let on: Vec<Point2> = (0..=20).map(|i| Point2::new(i as f64, 0.0)).collect();
        assert_eq!(dtw_feasibility(&on, &Pose::identity(), &r), 1.0);
        assert_eq!(dtw_feasibility(&on, &Pose::new(0.0, 500.0, 0.0), &r), 0.0);
    }

    #[test]
    fn feasibility_one_cell_offset_is_zero() {
        // 10 points, one per cell, one row above a parallel road: every
        // matched cell is at distance 1, DTW = 10, xi = 1 - 10/10.
        let r = horizontal(60.0);
        let spec = *r.spec();
        let row = spec.cell_of(Point2::new(0.0, 0.0)).1 + 1;
        let pts: Vec<Point2> = (5..15).map(|ix| spec.cell_center((ix, row))).collect();
        let cells = rasterize(&pts, &spec);
        let matched = matching_segment(&cells, &r.nearest);
        let d = dtw_distance(&cells_as_points(&cells), &cells_as_points(&matched)).unwrap();
        assert_eq!(d, 10.0);
        assert_eq!(dtw_feasibility(&pts, &Pose::identity(), &r), 0.0);
    }

    #[test]
    fn likelihood_is_mean_of_vehicles() {
        let r = horizontal(60.0);
        let on: Vec<Point2> = (0..=20).map(|i| Point2::new(i as f64, 0.0)).collect();
        // Ends far off the road; half of the cells are on it.
        let half: Vec<Point2> = (0..=20)
            .map(|i| Point2::new(i as f64, if i < 10 { 0.0 } else { 40.0 }))
            .collect();
        let xi_half = dtw_feasibility(&half, &Pose::identity(), &r);
        let z1 = scenario(vec![on.clone()]);
        assert_eq!(likelihood(&r, &Pose::identity(), &z1), 1.0);
        let z2 = scenario(vec![on.clone(), half.clone()]);
        assert_eq!(likelihood(&r, &Pose::identity(), &z2), (1.0 + xi_half) / 2.0);
        let z3 = scenario(vec![half, on]);
        assert_eq!(
            likelihood(&r, &Pose::identity(), &z2),
            likelihood(&r, &Pose::identity(), &z3)
        );
    }

    #[test]
    fn decay_values() {
        let p = FilterParams::default();
        assert_eq!(decay_factor(0, 0.3, &p), 1.0);
        assert!((decay_factor(10, 0.3, &p) - 1.0 / 1.1).abs() < 1e-12);
        assert!((decay_factor(0, 0.6, &p) - 5e-6f64.powf(0.1)).abs() < 1e-12);
        assert!((decay_factor(0, 0.6, &p) - 0.29505).abs() < 1e-5);
        for t in 0..100 {
            assert!(decay_factor(t + 1, 0.7, &p) <= decay_factor(t, 0.7, &p));
        }
        let mut q = 0.5;
        while q < 1.0 {
            assert!(decay_factor(5, q + 0.01, &p) <= decay_factor(5, q, &p));
            q += 0.01;
        }
    }

    #[test]
    fn diffuse_statistics_and_determinism() {
        let p = FilterParams::default();
        let poses = vec![Pose::new(1.0, 2.0, 0.5); 100_000];
        let a = diffuse(&poses, 1.0, &p, &mut stage_rng(4, 1));
        let b = diffuse(&poses, 1.0, &p, &mut stage_rng(4, 1));
        assert_eq!(a, b);
        let n = a.len() as f64;
        let mean = a.iter().map(|q| q.tx - 1.0).sum::<f64>() / n;
        let sd = (a.iter().map(|q| (q.tx - 1.0 - mean).powi(2)).sum::<f64>() / n).sqrt();
        assert!((sd - 8.0).abs() / 8.0 < 0.02, "sd {sd}");
        let tiny = diffuse(&poses[..10], 1e-15, &p, &mut stage_rng(4, 2));
        for q in tiny {
            assert!((q.tx - 1.0).abs() < 1e-12 && (q.theta - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn resample_keeps_top_forty_percent() {
        let p = FilterParams {
            n_particles: 10,
            ..FilterParams::default()
        };
        let proposals: Vec<Pose> = (0..10).map(|i| Pose::new(i as f64, 0.0, 0.0)).collect();
        let weights = vec![0.5, 0.1, 0.9, 0.3, 0.8, 0.2, 0.7, 0.0, 0.6, 0.4];
        let set = partial_resample(&proposals, &weights, &p, &mut stage_rng(1, 1)).unwrap();
        assert_eq!(set.particles.len(), 10);
        let kept: Vec<f64> = set.particles[6..].iter().map(|q| q.weight).collect();
        assert_eq!(kept, vec![0.6, 0.7, 0.8, 0.9]);
        assert_eq!(set.particles[9].pose, proposals[2]);
        assert_eq!(set.best.weight, 0.9);
    }

    #[test]
    fn resample_degenerate_categorical() {
        let p = FilterParams {
            n_particles: 10,
            ..FilterParams::default()
        };
        let proposals: Vec<Pose> = (0..10).map(|i| Pose::new(i as f64, 0.0, 0.0)).collect();
        let mut weights = vec![0.0; 10];
        weights[3] = 1.0;
        let set = partial_resample(&proposals, &weights, &p, &mut stage_rng(2, 1)).unwrap();
        assert!(set.particles[..6].iter().all(|q| q.pose == proposals[3]));
        let zeros = partial_resample(&proposals, &[0.0; 10], &p, &mut stage_rng(2, 1)).unwrap();
        assert_eq!(zeros.particles.len(), 10);
        assert!(partial_resample(&proposals, &[0.5; 3], &p, &mut stage_rng(2, 1)).is_err());
        assert!(partial_resample(&proposals, &[-1.0; 10], &p, &mut stage_rng(2, 1)).is_err());
    }

    #[test]
    fn resample_uniform_weights_chi_square() {
        let p = FilterParams {
            n_particles: 10,
            ..FilterParams::default()
        };
        let proposals: Vec<Pose> = (0..10).map(|i| Pose::new(i as f64, 0.0, 0.0)).collect();
        let mut counts = [0usize; 10];
        let mut rng = stage_rng(3, 1);
        for _ in 0..10_000 {
            let set = partial_resample(&proposals, &[0.3; 10], &p, &mut rng).unwrap();
            for q in &set.particles[..6] {
                counts[q.pose.tx as usize] += 1;
            }
        }
        let expected = 60_000.0 / 10.0;
        let chi2: f64 = counts.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
        // 99.9th percentile of chi-square with 9 degrees of freedom.
        assert!(chi2 < 27.88, "chi2 {chi2}");
    }

    #[test]
    fn params_validation() {
        assert!(FilterParams::default().validate().is_ok());
        for bad in [
            FilterParams {
                n_particles: 1,
                ..Default::default()
            },
            FilterParams {
                rho_r: 1.0,
                ..Default::default()
            },
            FilterParams {
                rho_c: 0.0,
                ..Default::default()
            },
            FilterParams {
                q_tilde: 1.5,
                ..Default::default()
            },
            FilterParams {
                t_max: 0,
                ..Default::default()
            },
            FilterParams {
                alpha_decay: 0.0,
                ..Default::default()
            },
            FilterParams {
                sigma_xy: f64::NAN,
                ..Default::default()
            },
        ] {
            assert!(bad.validate().is_err(), "{bad:?}");
        }
        assert_eq!(FilterParams::default().n_resampled(), 300);
    }

    #[test]
    fn straight_road_scenario_is_recovered() {
        let map =
            RoadStructure::from_polylines("iso", &[vec![Point2::new(0.0, 0.0), Point2::new(120.0, 0.0)]], 1.0).unwrap();
        let r = RoadIndex::build(&map, 2.0).unwrap();
        let mut z = scenario(vec![map.roads[0].clone()]);
        z.center();
        let res = compute_single_scenario(
            &z,
            &r,
            &FilterParams {
                seed: 5,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(res.compatibility >= 0.9, "{res:?}");
        assert_eq!(res.compatibility, likelihood(&r, &res.best_pose, &z));
    }

    #[test]
    fn planted_scenario_and_trace_invariants() {
        let map = synthetic::grid_city(4, 80.0).unwrap();
        let r = RoadIndex::build(&map, 2.0).unwrap();
        let s = synthesize_scenario(&map, SynthKind::OnRoadPath, 40.0, 21).unwrap();
        assert!(likelihood(&r, &s.planted.unwrap(), &s.scenario) >= 0.99);
        let params = FilterParams {
            seed: 8,
            ..Default::default()
        };
        let a = compute_single_scenario(&s.scenario, &r, &params).unwrap();
        let b = compute_single_scenario(&s.scenario, &r, &params).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.trace.len(), a.iterations);
        assert!(a.trace.windows(2).all(|w| w[1].q_star >= w[0].q_star));
        assert_eq!(a.trace[0].gamma, 1.0);
    }

    #[test]
    fn invalid_inputs_rejected() {
        let r = horizontal(60.0);
        let z = scenario(vec![vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)]]);
        assert!(compute_single_scenario(&z, &r, &FilterParams::default()).is_err());
        let z = scenario(vec![(0..10).map(|i| Point2::new(i as f64, 0.0)).collect()]);
        let bad = FilterParams {
            n_particles: 0,
            ..Default::default()
        };
        assert!(compute_single_scenario(&z, &r, &bad).is_err());
    }
}
