use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::{yaw_pitch, PoseSample, TrajectoryError};

/// Classes per axis.
pub const N_CLASSES: u8 = 7;
/// Pitch magnitude limit for stepped kinematics, radians.
pub const MAX_PITCH: f64 = 1.4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ControlLimits {
    pub max_pitch_rate: f64,
    pub max_yaw_rate: f64,
    pub max_speed: f64,
}

impl Default for ControlLimits {
    fn default() -> Self {
        Self {
            max_pitch_rate: 0.5,
            max_yaw_rate: 0.5,
            max_speed: 1.0,
        }
    }
}

impl ControlLimits {
    pub fn validate(&self) -> Result<(), TrajectoryError> {
        for (name, v) in [
            ("max_pitch_rate", self.max_pitch_rate),
            ("max_yaw_rate", self.max_yaw_rate),
            ("max_speed", self.max_speed),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(TrajectoryError::Command(format!("{name} must be > 0")));
            }
        }
        Ok(())
    }
}

/// Rates in rad/s (pitch positive nose down, yaw positive to the right),
/// speed in m/s along the body x axis.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlCommand {
    pub pitch_rate: f64,
    pub yaw_rate: f64,
    pub forward_speed: f64,
}

impl ControlCommand {
    pub fn new(pitch_rate: f64, yaw_rate: f64, forward_speed: f64) -> Self {
        Self {
            pitch_rate,
            yaw_rate,
            forward_speed,
        }
    }

    /// Clamps into the limits; non-finite values become 0.
    pub fn clamped(&self, lim: &ControlLimits) -> Self {
        let c = |v: f64, lo: f64, hi: f64| if v.is_finite() { v.clamp(lo, hi) } else { 0.0 };
        Self {
            pitch_rate: c(self.pitch_rate, -lim.max_pitch_rate, lim.max_pitch_rate),
            yaw_rate: c(self.yaw_rate, -lim.max_yaw_rate, lim.max_yaw_rate),
            forward_speed: c(self.forward_speed, 0.0, lim.max_speed),
        }
    }

    pub fn within(&self, lim: &ControlLimits) -> bool {
        self.clamped(lim) == *self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ControlLabel {
    pub pitch_class: u8,
    pub yaw_class: u8,
}

impl ControlLabel {
    pub const CENTER: ControlLabel = ControlLabel {
        pitch_class: 3,
        yaw_class: 3,
    };

    pub fn is_valid(&self) -> bool {
        self.pitch_class < N_CLASSES && self.yaw_class < N_CLASSES
    }
}

fn quantize_axis(rate: f64, max: f64) -> u8 {
    let r = if rate.is_finite() { rate.clamp(-max, max) } else { 0.0 };
    let x = (r + max) / (2.0 * max);
    ((x * f64::from(N_CLASSES)).floor() as u8).min(N_CLASSES - 1)
}

/// Independent uniform bins over [−max, +max] per axis; class 3 holds zero.
pub fn quantize_control(cmd: &ControlCommand, max_pitch_rate: f64, max_yaw_rate: f64) -> ControlLabel {
    ControlLabel {
        pitch_class: quantize_axis(cmd.pitch_rate, max_pitch_rate),
        yaw_class: quantize_axis(cmd.yaw_rate, max_yaw_rate),
    }
}

/// First-order point-object update with roll locked at zero. Pitch is held
/// within ±[`MAX_PITCH`].
pub fn step_kinematics(pose: &PoseSample, cmd: &ControlCommand, dt: f64) -> Result<PoseSample, TrajectoryError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(TrajectoryError::Command("dt must be > 0".into()));
    }
    if ![cmd.pitch_rate, cmd.yaw_rate, cmd.forward_speed].iter().all(|v| v.is_finite()) || cmd.forward_speed < 0.0 {
        return Err(TrajectoryError::Command("command must be finite with forward_speed >= 0".into()));
    }
    let (yaw, pitch) = pose.yaw_pitch();
    let (orientation, d_yaw, d_pitch) = if cmd.pitch_rate == 0.0 && cmd.yaw_rate == 0.0 {
        (pose.orientation, 0.0, 0.0)
    } else {
        let new_yaw = yaw - cmd.yaw_rate * dt;
        let new_pitch = (pitch + cmd.pitch_rate * dt).clamp(-MAX_PITCH, MAX_PITCH);
        (yaw_pitch(new_yaw, new_pitch), new_yaw - yaw, new_pitch - pitch)
    };
    let forward = orientation * Vector3::x();
    let velocity = forward * cmd.forward_speed;
    let new_pitch = pitch + d_pitch;
    let (yr, pr) = (d_yaw / dt, d_pitch / dt);
    Ok(PoseSample {
        t: pose.t + dt,
        position: pose.position + velocity * dt,
        orientation,
        velocity,
        acceleration: (velocity - pose.velocity) / dt,
        angular_velocity: Vector3::new(-yr * new_pitch.sin(), pr, yr * new_pitch.cos()),
    })
}
