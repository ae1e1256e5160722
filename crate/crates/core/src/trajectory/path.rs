use nalgebra::{Point3, UnitQuaternion, Vector3};

use super::{heading_orientation, PoseSample, TrajectoryError};

/// Orientation keys are stored at this rate.
pub const ORIENTATION_KEY_HZ: f64 = 1000.0;
/// Half-width of the central difference used for angular velocity.
pub const ANGULAR_HALF_WINDOW_S: f64 = 0.5e-3;
/// Below this speed the heading is held rather than recomputed.
const HOLD_SPEED: f64 = 1e-9;

/// Time-parameterized C¹ path: cubic Hermite position segments plus
/// orientation keys that follow the velocity heading with zero roll.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    points: Vec<Point3<f64>>,
    /// Velocity at each knot.
    tangents: Vec<Vector3<f64>>,
    keys: Vec<UnitQuaternion<f64>>,
}

fn hermite(s: f64) -> ([f64; 4], [f64; 4], [f64; 4]) {
    let (s2, s3) = (s * s, s * s * s);
    // h00, h10, h01, h11 and first/second derivatives in s.
    let h = [2.0 * s3 - 3.0 * s2 + 1.0, s3 - 2.0 * s2 + s, -2.0 * s3 + 3.0 * s2, s3 - s2];
    let dh = [6.0 * s2 - 6.0 * s, 3.0 * s2 - 4.0 * s + 1.0, -6.0 * s2 + 6.0 * s, 3.0 * s2 - 2.0 * s];
    let ddh = [12.0 * s - 6.0, 6.0 * s - 4.0, -12.0 * s + 6.0, 6.0 * s - 2.0];
    (h, dh, ddh)
}

/// Catmull–Rom path through `waypoints` with chord-length timing at
/// `cruise_speed`, starting at t = 0.
pub fn fit_path(waypoints: &[Point3<f64>], cruise_speed: f64) -> Result<Trajectory, TrajectoryError> {
    fit_path_from(waypoints, cruise_speed, 0.0)
}

pub fn fit_path_from(waypoints: &[Point3<f64>], cruise_speed: f64, t0: f64) -> Result<Trajectory, TrajectoryError> {
    if waypoints.len() < 2 {
        return Err(TrajectoryError::Path("need at least 2 waypoints".into()));
    }
    if !(cruise_speed.is_finite() && cruise_speed > 0.0) {
        return Err(TrajectoryError::Path("cruise_speed must be > 0".into()));
    }
    if !t0.is_finite() || waypoints.iter().any(|p| p.iter().any(|c| !c.is_finite())) {
        return Err(TrajectoryError::Path("waypoints and start time must be finite".into()));
    }
    let mut times = Vec::with_capacity(waypoints.len());
    times.push(t0);
    for (k, w) in waypoints.windows(2).enumerate() {
        let d = (w[1] - w[0]).norm();
        if d == 0.0 {
            return Err(TrajectoryError::Path(format!("waypoints {k} and {} coincide", k + 1)));
        }
        times.push(times[k] + d / cruise_speed);
    }
    let n = waypoints.len();
    let tangents = (0..n)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            (waypoints[b] - waypoints[a]) / (times[b] - times[a])
        })
        .collect();
    let mut traj = Trajectory {
        times,
        points: waypoints.to_vec(),
        tangents,
        keys: Vec::new(),
    };
    let first = waypoints[1] - waypoints[0];
    traj.build_keys(heading_orientation(&first).unwrap_or_else(UnitQuaternion::identity));
    Ok(traj)
}

impl Trajectory {
    /// Stationary trajectory at `position` facing `yaw` (radians, about +z).
    pub fn hover(position: Point3<f64>, yaw: f64, t0: f64, duration: f64) -> Result<Self, TrajectoryError> {
        if !(duration.is_finite() && duration > 0.0) || !t0.is_finite() {
            return Err(TrajectoryError::Path("hover needs a finite start and duration > 0".into()));
        }
        let mut traj = Trajectory {
            times: vec![t0, t0 + duration],
            points: vec![position, position],
            tangents: vec![Vector3::zeros(); 2],
            keys: Vec::new(),
        };
        traj.build_keys(UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw));
        Ok(traj)
    }

    fn build_keys(&mut self, initial: UnitQuaternion<f64>) {
        let n = (self.duration() * ORIENTATION_KEY_HZ).ceil() as usize + 1;
        let mut keys = Vec::with_capacity(n);
        let mut prev = initial;
        for k in 0..n {
            let t = (self.t0() + k as f64 / ORIENTATION_KEY_HZ).min(self.t1());
            let (_, v, _) = self.eval(t);
            let mut q = if v.norm() > HOLD_SPEED {
                heading_orientation(&v).unwrap_or(prev)
            } else {
                prev
            };
            if q.coords.dot(&prev.coords) < 0.0 {
                q = UnitQuaternion::new_unchecked(-q.into_inner());
            }
            keys.push(q);
            prev = q;
        }
        self.keys = keys;
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn t1(&self) -> f64 {
        *self.times.last().expect("non-empty")
    }

    pub fn duration(&self) -> f64 {
        self.t1() - self.t0()
    }

    pub fn waypoints(&self) -> &[Point3<f64>] {
        &self.points
    }

    pub fn waypoint_times(&self) -> &[f64] {
        &self.times
    }

    /// Length of the waypoint polyline.
    pub fn chord_length(&self) -> f64 {
        self.points.windows(2).map(|w| (w[1] - w[0]).norm()).sum()
    }

    /// Position, velocity, acceleration at t (clamped into range).
    fn eval(&self, t: f64) -> (Point3<f64>, Vector3<f64>, Vector3<f64>) {
        let t = t.clamp(self.t0(), self.t1());
        let i = self.times.partition_point(|&x| x <= t).clamp(1, self.times.len() - 1) - 1;
        let dt = self.times[i + 1] - self.times[i];
        let s = (t - self.times[i]) / dt;
        let (h, dh, ddh) = hermite(s);
        let d = self.points[i + 1] - self.points[i];
        let m0 = self.tangents[i] * dt;
        let m1 = self.tangents[i + 1] * dt;
        let p = self.points[i] + d * h[2] + m0 * h[1] + m1 * h[3];
        let v = (d * dh[2] + m0 * dh[1] + m1 * dh[3]) / dt;
        let a = (d * ddh[2] + m0 * ddh[1] + m1 * ddh[3]) / (dt * dt);
        (p, v, a)
    }

    fn orientation(&self, t: f64) -> UnitQuaternion<f64> {
        let x = ((t - self.t0()) * ORIENTATION_KEY_HZ).max(0.0);
        let k = (x.floor() as usize).min(self.keys.len() - 1);
        if k + 1 >= self.keys.len() {
            return self.keys[k];
        }
        let f = x - k as f64;
        if f == 0.0 || self.keys[k] == self.keys[k + 1] {
            return self.keys[k];
        }
        // Keys are 1 ms apart, so normalised lerp is indistinguishable from slerp
        // and avoids acos round-off on near-identical keys.
        self.keys[k].nlerp(&self.keys[k + 1], f)
    }

    fn angular_velocity(&self, t: f64) -> Vector3<f64> {
        let lo = (t - ANGULAR_HALF_WINDOW_S).max(self.t0());
        let hi = (t + ANGULAR_HALF_WINDOW_S).min(self.t1());
        if hi <= lo {
            return Vector3::zeros();
        }
        let rel = self.orientation(lo).inverse() * self.orientation(hi);
        let rel = if rel.w < 0.0 { UnitQuaternion::new_unchecked(-rel.into_inner()) } else { rel };
        rel.scaled_axis() / (hi - lo)
    }

    /// Full ground-truth pose at `t` in [t0, t1].
    pub fn sample_pose(&self, t: f64) -> Result<PoseSample, TrajectoryError> {
        if !(t >= self.t0() && t <= self.t1()) {
            return Err(TrajectoryError::Domain {
                t,
                t0: self.t0(),
                t1: self.t1(),
            });
        }
        let (position, velocity, acceleration) = self.eval(t);
        Ok(PoseSample {
            t,
            position,
            orientation: self.orientation(t),
            velocity,
            acceleration,
            angular_velocity: self.angular_velocity(t),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use proptest::prelude::*;
    use rand::Rng;
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn circle(n: usize, r: f64) -> Vec<Point3<f64>> {
        (0..n)
            .map(|k| {
                let a = TAU * k as f64 / n as f64;
                Point3::new(r * a.cos(), r * a.sin(), -2.0)
            })
            .collect()
    }

    #[test]
    fn straight_two_point_path() {
        let traj = fit_path(&[Point3::origin(), Point3::new(10.0, 0.0, 0.0)], 1.0).unwrap();
        assert!((traj.duration() - 10.0).abs() < 1e-12);
        for t in [0.0, 2.5, 7.1, 10.0] {
            let p = traj.sample_pose(t).unwrap();
            assert!((p.position - Point3::new(t, 0.0, 0.0)).norm() < 1e-9);
            assert!((p.velocity - Vector3::x()).norm() < 1e-12);
            assert!(p.acceleration.norm() < 1e-6);
            assert!(p.angular_velocity.norm() < 1e-9);
        }
    }

    #[test]
    fn passes_through_waypoints() {
        let wps = vec![
            Point3::new(0.0, 0.0, -1.0),
            Point3::new(3.0, 1.0, -1.5),
            Point3::new(4.0, 5.0, -1.0),
            Point3::new(-2.0, 6.0, -2.0),
        ];
        let traj = fit_path(&wps, 0.7).unwrap();
        for (w, &t) in wps.iter().zip(traj.waypoint_times()) {
            assert!((traj.sample_pose(t).unwrap().position - w).norm() < 1e-9);
        }
    }

    #[test]
    fn circle_speed_stays_near_cruise() {
        let traj = fit_path(&circle(16, 5.0), 1.0).unwrap();
        let n = 2000;
        for k in 0..=n {
            let t = traj.t0() + traj.duration() * k as f64 / n as f64;
            let v = traj.sample_pose(t).unwrap().velocity.norm();
            assert!((v - 1.0).abs() < 0.1, "t={t} speed {v}");
        }
    }

    #[test]
    fn hover_is_still() {
        let traj = Trajectory::hover(Point3::new(1.0, 2.0, -3.0), 0.4, 5.0, 2.0).unwrap();
        for t in [5.0, 5.5, 7.0] {
            let p = traj.sample_pose(t).unwrap();
            assert_eq!(p.velocity, Vector3::zeros());
            assert_eq!(p.acceleration, Vector3::zeros());
            assert_eq!(p.angular_velocity, Vector3::zeros());
            assert_eq!(p.position, Point3::new(1.0, 2.0, -3.0));
        }
    }

    #[test]
    fn rejects_bad_paths_and_times() {
        assert!(fit_path(&[Point3::origin()], 1.0).is_err());
        assert!(fit_path(&[Point3::origin(), Point3::origin()], 1.0).is_err());
        assert!(fit_path(&[Point3::origin(), Point3::new(1.0, 0.0, 0.0)], 0.0).is_err());
        let traj = fit_path(&[Point3::origin(), Point3::new(1.0, 0.0, 0.0)], 1.0).unwrap();
        assert!(matches!(traj.sample_pose(1.5), Err(TrajectoryError::Domain { .. })));
        assert!(traj.sample_pose(-1e-9).is_err());
    }

    #[test]
    fn heading_follows_velocity_with_zero_roll() {
        let traj = fit_path(&circle(16, 5.0), 1.0).unwrap();
        for t in [1.0, 7.3, 20.0] {
            let p = traj.sample_pose(t).unwrap();
            let fwd = p.orientation * Vector3::x();
            assert!((fwd - p.velocity.normalize()).norm() < 1e-3);
            let left = p.orientation * Vector3::y();
            assert!(left.z.abs() < 1e-9);
        }
    }

    #[test]
    fn yaw_rate_on_circle_matches_curvature() {
        // Counter-clockwise circle of radius 5 at 1 m/s turns left at 0.2 rad/s.
        let traj = fit_path(&circle(64, 5.0), 1.0).unwrap();
        let t = 0.5 * traj.duration();
        let w = traj.sample_pose(t).unwrap().angular_velocity;
        assert!((w.z - 0.2).abs() < 0.01, "{w}");
        assert!(w.x.abs() < 1e-9 && w.y.abs() < 1e-9);
    }

    #[test]
    fn hover_yaw_sets_heading() {
        let p = Trajectory::hover(Point3::origin(), FRAC_PI_2, 0.0, 1.0).unwrap().sample_pose(0.5).unwrap();
        assert!((p.orientation * Vector3::x() - Vector3::y()).norm() < 1e-12);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = seeded_rng(5);
        let wps: Vec<Point3<f64>> = (0..8)
            .map(|_| Point3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-3.0..0.0)))
            .collect();
        let traj = fit_path(&wps, 0.8).unwrap();
        let h = 1e-4;
        for _ in 0..1000 {
            let t = rng.gen_range(traj.t0() + h..traj.t1() - h);
            let p = traj.sample_pose(t).unwrap();
            let (pm, pp) = (traj.sample_pose(t - h).unwrap(), traj.sample_pose(t + h).unwrap());
            let v_fd = (pp.position - pm.position) / (2.0 * h);
            assert!((v_fd - p.velocity).norm() < 1e-5);
            // Acceleration jumps at knots; skip windows straddling one.
            let straddles = traj.waypoint_times().iter().any(|&k| (k - t).abs() <= h);
            if !straddles {
                let a_fd = (pp.velocity - pm.velocity) / (2.0 * h);
                assert!((a_fd - p.acceleration).norm() < 1e-3);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn quaternions_are_unit(seed in any::<u64>(), frac in 0.0f64..=1.0) {
            let mut rng = seeded_rng(seed);
            let wps: Vec<Point3<f64>> = (0..5)
                .map(|_| Point3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-3.0..0.0)))
                .collect();
            let traj = fit_path(&wps, 1.0).unwrap();
            let p = traj.sample_pose(traj.t0() + frac * traj.duration()).unwrap();
            prop_assert!((p.orientation.norm() - 1.0).abs() < 1e-9);
        }
    }
}
