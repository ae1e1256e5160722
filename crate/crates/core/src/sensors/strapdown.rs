use nalgebra::{UnitQuaternion, Vector3};

use super::ImuSample;
use crate::trajectory::PoseSample;

/// Dead-reckons body pose from IMU samples with trapezoidal steps. The first
/// sample must coincide with `initial.t`; returns one state per sample.
pub fn integrate_strapdown(samples: &[ImuSample], initial: &PoseSample, gravity: f64) -> Vec<PoseSample> {
    let g = Vector3::new(0.0, 0.0, -gravity);
    let mut out = Vec::with_capacity(samples.len());
    let Some(first) = samples.first() else {
        return out;
    };
    let mut state = PoseSample {
        t: first.t,
        acceleration: initial.orientation * first.accel + g,
        angular_velocity: first.gyro,
        ..*initial
    };
    out.push(state);
    for w in samples.windows(2) {
        let (s0, s1) = (&w[0], &w[1]);
        let dt = s1.t - s0.t;
        let q1 = state.orientation * UnitQuaternion::from_scaled_axis((s0.gyro + s1.gyro) * (0.5 * dt));
        let a1 = q1 * s1.accel + g;
        let v1 = state.velocity + (state.acceleration + a1) * (0.5 * dt);
        let p1 = state.position + (state.velocity + v1) * (0.5 * dt);
        state = PoseSample {
            t: s1.t,
            position: p1,
            orientation: q1,
            velocity: v1,
            acceleration: a1,
            angular_velocity: s1.gyro,
        };
        out.push(state);
    }
    out
}
