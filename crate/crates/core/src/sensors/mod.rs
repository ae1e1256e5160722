//! Synthetic IMU and sonar measurements from ground-truth motion.
//!
//! IMU output is ground truth plus bias plus noise, where the bias is a
//! constant offset plus a Gauss–Markov drift and the noise is white
//! (random walk once integrated) plus an optional vibration term. Every
//! random draw comes from a counter-addressed stream keyed on
//! (seed, sensor, axis, sample index).

mod imu;
mod log;
mod sonar;
mod strapdown;
mod water;

pub use imu::{
    ideal_imu, synth_imu, ImuConfig, ImuPreset, ImuSample, ImuSynthesizer, VibrationModel, VibrationSource, STANDARD_GRAVITY,
};
pub use log::{read_imu_csv, write_imu_csv, write_sonar_csv, write_sonar_ply, IMU_CSV_HEADER, SONAR_CSV_HEADER};
pub use sonar::{scan_sonar, SonarConfig, SonarMode, SonarReturn};
pub use strapdown::integrate_strapdown;
pub use water::{sound_speed, sound_speed_checked, SoundSpeed, WaterProperties};

use crate::render::RenderError;
use crate::trajectory::TrajectoryError;

#[derive(Debug, thiserror::Error)]
pub enum SensorError {
    #[error("invalid sensor config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Render(#[from] RenderError),
}
