//! Planar geometry: GPS projection, rigid transforms, polyline resampling
//! and bounding boxes.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Mean Earth radius of the spherical model, in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// A planar point in meters (x east, y north).
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn distance(&self, other: &Point2) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Rigid placement hypothesis `<tx, ty, theta>`.
///
/// `theta` is kept in `[0, 2π)` so that every placement has one
/// representation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose {
    pub tx: f64,
    pub ty: f64,
    pub theta: f64,
}

impl Pose {
    pub fn new(tx: f64, ty: f64, theta: f64) -> Self {
        Self {
            tx,
            ty,
            theta: normalize_angle(theta),
        }
    }

    pub fn identity() -> Self {
        Self::default()
    }

    /// Maps a single point from the scenario frame into the map frame.
    pub fn apply(&self, p: Point2) -> Point2 {
        let (s, c) = self.theta.sin_cos();
        Point2::new(c * p.x - s * p.y + self.tx, s * p.x + c * p.y + self.ty)
    }

    /// The pose `inv` with `inv.apply(self.apply(p)) == p`.
    pub fn inverse(&self) -> Pose {
        let (s, c) = self.theta.sin_cos();
        // R^T * (-t)
        let tx = -(c * self.tx + s * self.ty);
        let ty = -(-s * self.tx + c * self.ty);
        Pose::new(tx, ty, -self.theta)
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn normalize_angle(theta: f64) -> f64 {
    let t = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub min: Point2,
    pub max: Point2,
}

impl BBox {
    /// Smallest box enclosing `points`, or `None` if there are none.
    pub fn enclosing<'a, I>(points: I) -> Option<BBox>
    where
        I: IntoIterator<Item = &'a Point2>,
    {
        points.into_iter().fold(None, |acc, p| match acc {
            None => Some(BBox { min: *p, max: *p }),
            Some(b) => Some(BBox {
                min: Point2::new(b.min.x.min(p.x), b.min.y.min(p.y)),
                max: Point2::new(b.max.x.max(p.x), b.max.y.max(p.y)),
            }),
        })
    }

    pub fn width(&self) -> f64 {
        self.max.x - self.min.x
    }

    pub fn height(&self) -> f64 {
        self.max.y - self.min.y
    }

    pub fn contains(&self, p: &Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }
}

/// Latitude/longitude pair in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub const fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }
}

/// Mean longitude of `points`, the default central meridian.
pub fn mean_longitude(points: &[LatLon]) -> Option<f64> {
    if points.is_empty() {
        return None;
    }
    Some(points.iter().map(|p| p.lon).sum::<f64>() / points.len() as f64)
}

/// Sinusoidal projection on a sphere of radius [`EARTH_RADIUS_M`].
///
/// When `central_meridian` is `None` the mean longitude of the input is
/// used.
pub fn project_sinusoidal(points: &[LatLon], central_meridian: Option<f64>) -> Result<Vec<Point2>> {
    for (index, p) in points.iter().enumerate() {
        if !(-90.0..=90.0).contains(&p.lat) || !(-180.0..=180.0).contains(&p.lon) {
            return Err(Error::CoordinateRange {
                index,
                detail: format!("lat={} lon={}", p.lat, p.lon),
            });
        }
    }
    let Some(lon0) = central_meridian.or_else(|| mean_longitude(points)) else {
        return Ok(Vec::new());
    };
    Ok(points
        .iter()
        .map(|p| {
            let lat = p.lat.to_radians();
            let dlon = (p.lon - lon0).to_radians();
            Point2::new(EARTH_RADIUS_M * dlon * lat.cos(), EARTH_RADIUS_M * lat)
        })
        .collect())
}

/// Inverse of [`project_sinusoidal`] for a known central meridian.
pub fn unproject_sinusoidal(points: &[Point2], central_meridian: f64) -> Vec<LatLon> {
    points
        .iter()
        .map(|p| {
            let lat = p.y / EARTH_RADIUS_M;
            let c = lat.cos();
            let dlon = if c.abs() < 1e-12 {
                0.0
            } else {
                p.x / (EARTH_RADIUS_M * c)
            };
            LatLon::new(lat.to_degrees(), central_meridian + dlon.to_degrees())
        })
        .collect()
}

/// 3×3 homogeneous matrix of the rigid transform described by `pose`.
pub fn make_transform(pose: &Pose) -> [[f64; 3]; 3] {
    let (s, c) = pose.theta.sin_cos();
    [[c, -s, pose.tx], [s, c, pose.ty], [0.0, 0.0, 1.0]]
}

/// Applies `pose` to every point of a trajectory.
pub fn apply_pose(trajectory: &[Point2], pose: &Pose) -> Vec<Point2> {
    trajectory.iter().map(|p| pose.apply(*p)).collect()
}

/// Subdivides every segment uniformly so consecutive points are at most
/// `spacing` apart. Original vertices are kept.
pub fn resample_polyline(polyline: &[Point2], spacing: f64) -> Result<Vec<Point2>> {
    if !(spacing > 0.0) || !spacing.is_finite() {
        return Err(Error::Parameter(format!(
            "resample spacing must be positive, got {spacing}"
        )));
    }
    let Some(first) = polyline.first() else {
        return Ok(Vec::new());
    };
    let mut out = vec![*first];
    for pair in polyline.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let len = a.distance(&b);
        // 1e-9 slack keeps exact multiples from spawning an extra piece.
        let pieces = ((len / spacing) - 1e-9).ceil().max(1.0) as usize;
        for k in 1..pieces {
            let f = k as f64 / pieces as f64;
            out.push(Point2::new(a.x + (b.x - a.x) * f, a.y + (b.y - a.y) * f));
        }
        out.push(b);
    }
    Ok(out)
}

/// Total arc length of a polyline.
pub fn polyline_length(polyline: &[Point2]) -> f64 {
    polyline.windows(2).map(|w| w[0].distance(&w[1])).sum()
}

/// Smallest signed difference between two angles, in `(-π, π]`.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    if d > PI {
        d - TAU
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn close(a: Point2, b: Point2, tol: f64) -> bool {
        (a.x - b.x).abs() <= tol && (a.y - b.y).abs() <= tol
    }

    #[test]
    fn projection_origin_and_equator_degree() {
        let pts = [LatLon::new(0.0, 10.0), LatLon::new(0.0, 11.0), LatLon::new(60.0, 11.0)];
        let out = project_sinusoidal(&pts, Some(10.0)).unwrap();
        assert!(close(out[0], Point2::new(0.0, 0.0), 1e-9));
        assert!((out[1].x - 111_194.926_644_558_73).abs() < 1e-6);
        assert_eq!(out[1].y, 0.0);
        assert!((out[2].x - 55_597.463_322_279_37).abs() < 1e-6);
    }

    #[test]
    fn projection_defaults_to_mean_longitude() {
        let pts = [LatLon::new(0.0, 9.0), LatLon::new(0.0, 11.0)];
        let out = project_sinusoidal(&pts, None).unwrap();
        assert!((out[0].x + out[1].x).abs() < 1e-9);
        assert!(project_sinusoidal(&[], None).unwrap().is_empty());
    }

    #[test]
    fn projection_rejects_out_of_range() {
        let pts = [LatLon::new(0.0, 0.0), LatLon::new(91.0, 0.0)];
        match project_sinusoidal(&pts, None) {
            Err(Error::CoordinateRange { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unprojection_round_trips() {
        let pts = [LatLon::new(42.3, -83.7), LatLon::new(42.31, -83.69)];
        let xy = project_sinusoidal(&pts, Some(-83.695)).unwrap();
        let back = unproject_sinusoidal(&xy, -83.695);
        for (a, b) in pts.iter().zip(&back) {
            assert!((a.lat - b.lat).abs() < 1e-10 && (a.lon - b.lon).abs() < 1e-10);
        }
    }

    #[test]
    fn transforms() {
        assert_eq!(
            make_transform(&Pose::identity()),
            [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
        );
        let m = make_transform(&Pose::new(3.0, 4.0, 0.0));
        assert_eq!((m[0][2], m[1][2]), (3.0, 4.0));
        assert_eq!((m[0][0], m[1][1]), (1.0, 1.0));
        let q = Pose::new(0.0, 0.0, FRAC_PI_2).apply(Point2::new(1.0, 0.0));
        assert!(close(q, Point2::new(0.0, 1.0), 1e-12));
        let m = make_transform(&Pose::new(1.0, 2.0, 0.7));
        assert!((m[0][0] * m[1][1] - m[0][1] * m[1][0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn apply_pose_examples() {
        let p = vec![Point2::new(0.0, 0.0), Point2::new(1.0, 0.0)];
        assert_eq!(apply_pose(&p, &Pose::identity()), p);
        assert_eq!(
            apply_pose(&p, &Pose::new(1.0, 2.0, 0.0)),
            vec![Point2::new(1.0, 2.0), Point2::new(2.0, 2.0)]
        );
        let r = apply_pose(&[Point2::new(1.0, 1.0)], &Pose::new(0.0, 0.0, PI));
        assert!(close(r[0], Point2::new(-1.0, -1.0), 1e-12));
    }

    #[test]
    fn pose_theta_normalized() {
        assert!((Pose::new(0.0, 0.0, -FRAC_PI_2).theta - 3.0 * FRAC_PI_2).abs() < 1e-12);
        assert_eq!(Pose::new(0.0, 0.0, TAU).theta, 0.0);
        assert_eq!(normalize_angle(-1e-300), 0.0);
    }

    #[test]
    fn resample_examples() {
        let out = resample_polyline(&[Point2::new(0.0, 0.0), Point2::new(3.0, 0.0)], 1.0).unwrap();
        assert_eq!(
            out,
            vec![
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(2.0, 0.0),
                Point2::new(3.0, 0.0)
            ]
        );
        let single = resample_polyline(&[Point2::new(0.0, 0.0)], 1.0).unwrap();
        assert_eq!(single, vec![Point2::new(0.0, 0.0)]);

        // 2.5 m needs ceil(2.5) = 3 pieces of 0.8333 m, i.e. 4 points.
        let out = resample_polyline(&[Point2::new(0.0, 0.0), Point2::new(0.0, 2.5)], 1.0).unwrap();
        assert_eq!(out.len(), 4);
        assert_eq!(out[0], Point2::new(0.0, 0.0));
        assert_eq!(out[3], Point2::new(0.0, 2.5));
        assert!(out.windows(2).all(|w| w[0].distance(&w[1]) <= 1.0));
    }

    #[test]
    fn resample_rejects_bad_spacing() {
        assert!(resample_polyline(&[Point2::new(0.0, 0.0)], 0.0).is_err());
        assert!(resample_polyline(&[Point2::new(0.0, 0.0)], -1.0).is_err());
    }

    fn point() -> impl Strategy<Value = Point2> {
        (-500.0..500.0f64, -500.0..500.0f64).prop_map(|(x, y)| Point2::new(x, y))
    }

    fn pose() -> impl Strategy<Value = Pose> {
        (-1e3..1e3f64, -1e3..1e3f64, -10.0..10.0f64).prop_map(|(x, y, t)| Pose::new(x, y, t))
    }

    proptest! {
        #[test]
        fn pose_round_trip(pts in prop::collection::vec(point(), 1..20), pose in pose()) {
            let back = apply_pose(&apply_pose(&pts, &pose), &pose.inverse());
            for (a, b) in pts.iter().zip(&back) {
                prop_assert!(close(*a, *b, 1e-9));
            }
        }

        #[test]
        fn pose_preserves_distances(pts in prop::collection::vec(point(), 2..20), pose in pose()) {
            let moved = apply_pose(&pts, &pose);
            for i in 1..pts.len() {
                let d0 = pts[0].distance(&pts[i]);
                let d1 = moved[0].distance(&moved[i]);
                prop_assert!((d0 - d1).abs() <= 1e-9 * d0.max(1.0));
            }
        }

        #[test]
        fn resample_preserves_length(pts in prop::collection::vec(point(), 1..10), spacing in 0.3..5.0f64) {
            let out = resample_polyline(&pts, spacing).unwrap();
            prop_assert_eq!(out.first(), pts.first());
            prop_assert_eq!(out.last(), pts.last());
            prop_assert!((polyline_length(&out) - polyline_length(&pts)).abs() <= spacing);
            prop_assert!(out.windows(2).all(|w| w[0].distance(&w[1]) <= spacing + 1e-9));
        }

        #[test]
        fn projection_injective(lat in -80.0..80.0f64, lon in -179.0..179.0f64, dlon in 1e-4..1.0f64) {
            let pts = [LatLon::new(lat, lon), LatLon::new(lat, lon + dlon)];
            let out = project_sinusoidal(&pts, None).unwrap();
            prop_assert!(out[0] != out[1]);
        }
    }
}
