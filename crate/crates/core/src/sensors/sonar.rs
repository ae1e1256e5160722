use nalgebra::{Isometry3, Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::{sound_speed, SensorError, WaterProperties};
use crate::render::{AccelStructure, Ray, MISS_INSTANCE};
use crate::rng::{derive_seed_indexed, GaussianStream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SonarMode {
    /// One beam along sensor −z.
    #[default]
    SingleBeamDown,
    /// `beams` rays spread over `fan_aperture_deg` in the sensor x–y plane,
    /// centred on +x.
    FanScan,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SonarConfig {
    pub mode: SonarMode,
    pub beams: u32,
    pub fan_aperture_deg: f64,
    pub max_range_m: f64,
    pub range_noise_sigma_rel: f64,
    pub dropout_prob: f64,
    pub rate_hz: f64,
    pub seed: u64,
}

impl Default for SonarConfig {
    fn default() -> Self {
        Self {
            mode: SonarMode::SingleBeamDown,
            beams: 1,
            fan_aperture_deg: 90.0,
            max_range_m: 30.0,
            range_noise_sigma_rel: 0.01,
            dropout_prob: 0.0,
            rate_hz: 10.0,
            seed: 0,
        }
    }
}

impl SonarConfig {
    pub fn validate(&self) -> Result<(), SensorError> {
        let bad = |m: &str| Err(SensorError::InvalidConfig(m.into()));
        if self.beams == 0 {
            return bad("sonar beams must be >= 1");
        }
        if !(self.max_range_m.is_finite() && self.max_range_m > 0.0) {
            return bad("sonar max_range_m must be > 0");
        }
        if !(0.0..=1.0).contains(&self.dropout_prob) {
            return bad("sonar dropout_prob must be in [0, 1]");
        }
        if !(self.range_noise_sigma_rel.is_finite() && self.range_noise_sigma_rel >= 0.0) {
            return bad("sonar range_noise_sigma_rel must be >= 0");
        }
        if !(self.rate_hz.is_finite() && self.rate_hz > 0.0) {
            return bad("sonar rate_hz must be > 0");
        }
        if !(self.fan_aperture_deg.is_finite() && (0.0..=360.0).contains(&self.fan_aperture_deg)) {
            return bad("sonar fan_aperture_deg must be in [0, 360]");
        }
        Ok(())
    }

    /// (azimuth, elevation, unit direction) per beam in the sensor frame.
    pub fn beam_directions(&self) -> Vec<(f64, f64, Vector3<f64>)> {
        match self.mode {
            SonarMode::SingleBeamDown => vec![(0.0, -std::f64::consts::FRAC_PI_2, -Vector3::z())],
            SonarMode::FanScan => {
                let ap = self.fan_aperture_deg.to_radians();
                let n = self.beams as usize;
                (0..n)
                    .map(|i| {
                        let az = if n == 1 { 0.0 } else { -ap / 2.0 + ap * i as f64 / (n - 1) as f64 };
                        (az, 0.0, Vector3::new(az.cos(), az.sin(), 0.0))
                    })
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SonarReturn {
    pub t: f64,
    pub beam_azimuth_rad: f64,
    pub beam_elevation_rad: f64,
    pub range_m: f64,
    pub time_of_flight_s: f64,
    pub intensity: f64,
    pub class_id: u8,
    pub instance_id: u32,
    /// World position of the (noisy) return; the sensor origin if invalid.
    pub point: Point3<f64>,
    pub valid: bool,
}

/// One scan at time `t`. Noise and dropout are keyed on (seed, t, beam), so
/// a scan is reproducible on its own.
pub fn scan_sonar(
    accel: &AccelStructure,
    sensor_pose: &Isometry3<f64>,
    cfg: &SonarConfig,
    water: &WaterProperties,
    t: f64,
) -> Result<Vec<SonarReturn>, SensorError> {
    cfg.validate()?;
    let c = sound_speed(water);
    let scan_seed = derive_seed_indexed(cfg.seed, "sonar_scan", t.to_bits());
    let mut noise = GaussianStream::new(scan_seed, 0);
    let mut drop = GaussianStream::new(scan_seed, 1);
    let origin = Point3::from(sensor_pose.translation.vector);
    cfg.beam_directions()
        .into_iter()
        .enumerate()
        .map(|(b, (az, el, d))| {
            let dir = (sensor_pose.rotation * d).normalize();
            let ray = Ray::new(origin, dir)?;
            let mut ret = SonarReturn {
                t,
                beam_azimuth_rad: az,
                beam_elevation_rad: el,
                range_m: 0.0,
                time_of_flight_s: 0.0,
                intensity: 0.0,
                class_id: 0,
                instance_id: u32::from(MISS_INSTANCE),
                point: origin,
                valid: false,
            };
            let Some(hit) = accel.intersect(&ray).filter(|h| h.distance <= cfg.max_range_m) else {
                return Ok(ret);
            };
            let noisy = hit.distance * (1.0 + cfg.range_noise_sigma_rel * noise.normal(b as u64));
            let dropped = cfg.dropout_prob > 0.0 && drop.uniform(b as u64) < cfg.dropout_prob;
            if dropped || !(noisy > 0.0 && noisy <= cfg.max_range_m) {
                return Ok(ret);
            }
            let tof = 2.0 * noisy / c;
            // Halving is exact, so tof·c == 2·range holds bit for bit.
            let range = (tof * c) / 2.0;
            ret.range_m = range;
            ret.time_of_flight_s = tof;
            ret.intensity = hit.normal.dot(&dir).abs().min(1.0);
            ret.class_id = hit.class_id;
            ret.instance_id = hit.instance_id;
            ret.point = ray.at(range);
            ret.valid = true;
            Ok(ret)
        })
        .collect()
}
