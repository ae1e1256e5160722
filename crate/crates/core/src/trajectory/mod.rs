//! Point-object ROV motion: fitted waypoint paths, interactive kinematic
//! stepping, survey patterns and the 7+7 pitch/yaw control classes.
//!
//! World frame is z-up; the body frame is FLU (x forward, y left, z up).
//! Positive pitch is nose down; positive commanded yaw rate turns right.

mod control;
mod path;
mod recorded;
mod survey;

pub use control::{quantize_control, step_kinematics, ControlCommand, ControlLabel, ControlLimits, N_CLASSES, MAX_PITCH};
pub use path::{fit_path, fit_path_from, Trajectory, ANGULAR_HALF_WINDOW_S, ORIENTATION_KEY_HZ};
pub use recorded::{command_from_pose, MotionSource, RecordedMotion};
pub use survey::lawnmower_pattern;

use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum TrajectoryError {
    #[error("path error: {0}")]
    Path(String),
    #[error("time {t} outside trajectory range [{t0}, {t1}]")]
    Domain { t: f64, t0: f64, t1: f64 },
    #[error("invalid command: {0}")]
    Command(String),
}

/// Ground-truth vehicle state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoseSample {
    pub t: f64,
    pub position: Point3<f64>,
    /// Body to world.
    pub orientation: UnitQuaternion<f64>,
    /// World frame, m/s.
    pub velocity: Vector3<f64>,
    /// World frame, m/s².
    pub acceleration: Vector3<f64>,
    /// Body frame, rad/s.
    pub angular_velocity: Vector3<f64>,
}

impl PoseSample {
    pub fn at_rest(t: f64, position: Point3<f64>, yaw: f64) -> Self {
        Self {
            t,
            position,
            orientation: yaw_pitch(yaw, 0.0),
            velocity: Vector3::zeros(),
            acceleration: Vector3::zeros(),
            angular_velocity: Vector3::zeros(),
        }
    }

    pub fn isometry(&self) -> Isometry3<f64> {
        Isometry3::from_parts(Translation3::from(self.position.coords), self.orientation)
    }

    pub fn forward(&self) -> Vector3<f64> {
        self.orientation * Vector3::x()
    }

    /// (yaw about +z, pitch positive nose-down).
    pub fn yaw_pitch(&self) -> (f64, f64) {
        let f = self.forward();
        (f.y.atan2(f.x), (-f.z).clamp(-1.0, 1.0).asin())
    }
}

/// Zero-roll orientation `Rz(yaw) · Ry(pitch)`.
pub fn yaw_pitch(yaw: f64, pitch: f64) -> UnitQuaternion<f64> {
    UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw) * UnitQuaternion::from_axis_angle(&Vector3::y_axis(), pitch)
}

/// Orientation facing along `v` with zero roll; None for a zero vector.
pub fn heading_orientation(v: &Vector3<f64>) -> Option<UnitQuaternion<f64>> {
    let horiz = v.x.hypot(v.y);
    if horiz == 0.0 && v.z == 0.0 {
        return None;
    }
    let yaw = if horiz > 0.0 { v.y.atan2(v.x) } else { 0.0 };
    Some(yaw_pitch(yaw, (-v.z).atan2(horiz)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn heading_conventions() {
        let q = heading_orientation(&Vector3::new(1.0, 0.0, -1.0)).unwrap();
        let f = q * Vector3::x();
        assert!((f - Vector3::new(1.0, 0.0, -1.0).normalize()).norm() < 1e-12);
        let p = PoseSample { orientation: q, ..PoseSample::at_rest(0.0, Point3::origin(), 0.0) };
        let (yaw, pitch) = p.yaw_pitch();
        assert!(yaw.abs() < 1e-12 && (pitch - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!(heading_orientation(&Vector3::zeros()).is_none());
    }
}
