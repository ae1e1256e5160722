use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use super::SensorError;
use crate::rng::GaussianStream;
use crate::trajectory::{PoseSample, Trajectory};

pub const STANDARD_GRAVITY: f64 = 9.81;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ImuPreset {
    None,
    Low,
    #[default]
    Medium,
    High,
}

impl ImuPreset {
    /// (accel density (m/s²)/√Hz, gyro density (rad/s)/√Hz).
    pub fn densities(self) -> (f64, f64) {
        match self {
            ImuPreset::None => (0.0, 0.0),
            ImuPreset::Low => (0.0005, 5e-5),
            ImuPreset::Medium => (0.002, 2e-4),
            ImuPreset::High => (0.01, 1e-3),
        }
    }
}

/// Extra noise on top of the white random-walk term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum VibrationModel {
    #[default]
    None,
    White { sigma: f64 },
    Sinusoidal { amplitude: f64, freq_hz: f64, phase: [f64; 3] },
    /// One-sided PSD `level` (units²/Hz) flat up to `band_hz`, rolling off
    /// first-order above it.
    Psd { level: f64, band_hz: f64 },
}

impl VibrationModel {
    fn validate(&self, rate_hz: f64, name: &str) -> Result<(), SensorError> {
        let bad = |m: &str| Err(SensorError::InvalidConfig(format!("{name}: {m}")));
        match *self {
            VibrationModel::None => Ok(()),
            VibrationModel::White { sigma } if !(sigma >= 0.0 && sigma.is_finite()) => bad("sigma must be >= 0"),
            VibrationModel::Sinusoidal { amplitude, freq_hz, phase }
                if !(amplitude >= 0.0 && amplitude.is_finite() && freq_hz >= 0.0 && freq_hz.is_finite())
                    || phase.iter().any(|p| !p.is_finite()) =>
            {
                bad("sinusoid needs amplitude >= 0, freq_hz >= 0 and finite phases")
            }
            VibrationModel::Psd { level, band_hz }
                if !(level >= 0.0 && level.is_finite() && band_hz > 0.0 && band_hz < rate_hz / 2.0) =>
            {
                bad("psd needs level >= 0 and 0 < band_hz < rate_hz/2")
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ImuConfig {
    pub rate_hz: f64,
    pub preset: ImuPreset,
    pub accel_noise_density: f64,
    pub gyro_noise_density: f64,
    pub accel_bias_init: [f64; 3],
    pub gyro_bias_init: [f64; 3],
    /// Stationary std of the Gauss–Markov bias, per sensor.
    pub accel_bias_instability: f64,
    pub gyro_bias_instability: f64,
    pub correlation_time_s: f64,
    pub accel_vibration: VibrationModel,
    pub gyro_vibration: VibrationModel,
    pub seed: u64,
}

impl ImuConfig {
    /// Densities from the preset, bias instability at 10% of density and a
    /// 100 s correlation time.
    pub fn from_preset(preset: ImuPreset, rate_hz: f64, seed: u64) -> Self {
        let (a, g) = preset.densities();
        Self {
            rate_hz,
            preset,
            accel_noise_density: a,
            gyro_noise_density: g,
            accel_bias_init: [0.0; 3],
            gyro_bias_init: [0.0; 3],
            accel_bias_instability: 0.1 * a,
            gyro_bias_instability: 0.1 * g,
            correlation_time_s: 100.0,
            accel_vibration: VibrationModel::None,
            gyro_vibration: VibrationModel::None,
            seed,
        }
    }

    pub fn noiseless(rate_hz: f64) -> Self {
        Self::from_preset(ImuPreset::None, rate_hz, 0)
    }

    pub fn validate(&self) -> Result<(), SensorError> {
        let bad = |m: &str| Err(SensorError::InvalidConfig(m.into()));
        if !(self.rate_hz.is_finite() && self.rate_hz > 0.0) {
            return bad("imu rate_hz must be > 0");
        }
        for v in [
            self.accel_noise_density,
            self.gyro_noise_density,
            self.accel_bias_instability,
            self.gyro_bias_instability,
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return bad("imu noise densities and bias instabilities must be >= 0");
            }
        }
        if self.accel_bias_init.iter().chain(&self.gyro_bias_init).any(|b| !b.is_finite()) {
            return bad("imu initial biases must be finite");
        }
        if !(self.correlation_time_s.is_finite() && self.correlation_time_s > 0.0) {
            return bad("imu correlation_time_s must be > 0");
        }
        self.accel_vibration.validate(self.rate_hz, "accel_vibration")?;
        self.gyro_vibration.validate(self.rate_hz, "gyro_vibration")
    }

    /// Number of samples a span of `duration` seconds yields.
    pub fn sample_count(&self, duration: f64) -> usize {
        (duration * self.rate_hz + 1e-9).floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImuSample {
    pub t: f64,
    /// Specific force in the body frame, m/s².
    pub accel: Vector3<f64>,
    /// Body angular velocity, rad/s.
    pub gyro: Vector3<f64>,
}

/// Noise-free specific force and angular rate for a ground-truth state.
pub fn ideal_imu(pose: &PoseSample, gravity: f64) -> (Vector3<f64>, Vector3<f64>) {
    let g = Vector3::new(0.0, 0.0, -gravity);
    (pose.orientation.inverse_transform_vector(&(pose.acceleration - g)), pose.angular_velocity)
}

const WHITE: u64 = 0;
const BIAS: u64 = 1;
const VIB: u64 = 2;

fn stream_id(sensor: u64, axis: usize, component: u64) -> u64 {
    sensor * 16 + axis as u64 * 4 + component
}

/// Vibration generator for one sensor. Stateful only for the PSD model.
#[derive(Debug, Clone)]
pub struct VibrationSource {
    model: VibrationModel,
    rate_hz: f64,
    streams: [GaussianStream; 3],
    state: Option<[f64; 3]>,
    coeff: (f64, f64),
}

impl VibrationSource {
    pub fn new(model: VibrationModel, rate_hz: f64, seed: u64, sensor: u64) -> Self {
        let streams = std::array::from_fn(|a| GaussianStream::new(seed, stream_id(sensor, a, VIB)));
        let coeff = match model {
            VibrationModel::Psd { level, band_hz } => {
                let a = (-std::f64::consts::TAU * band_hz / rate_hz).exp();
                (a, (1.0 - a) * (level * rate_hz / 2.0).sqrt())
            }
            _ => (0.0, 0.0),
        };
        Self {
            model,
            rate_hz,
            streams,
            state: None,
            coeff,
        }
    }

    /// Sample `k` taken at time `t`. PSD output must be drawn with
    /// consecutive `k`.
    pub fn sample(&mut self, k: u64, t: f64) -> Vector3<f64> {
        match self.model {
            VibrationModel::None => Vector3::zeros(),
            VibrationModel::White { sigma } => Vector3::from_fn(|a, _| sigma * self.streams[a].normal(k)),
            VibrationModel::Sinusoidal { amplitude, freq_hz, phase } => {
                Vector3::from_fn(|a, _| amplitude * (std::f64::consts::TAU * freq_hz * t + phase[a]).sin())
            }
            VibrationModel::Psd { .. } => {
                let (a, b) = self.coeff;
                let mut y = match self.state {
                    Some(y) => y,
                    None => {
                        // Start from the stationary distribution.
                        let sd = b / (1.0 - a * a).sqrt();
                        std::array::from_fn(|i| sd * self.streams[i].normal(0))
                    }
                };
                for (i, yi) in y.iter_mut().enumerate() {
                    *yi = a * *yi + b * self.streams[i].normal(k + 1);
                }
                self.state = Some(y);
                Vector3::from(y)
            }
        }
    }

    pub fn rate_hz(&self) -> f64 {
        self.rate_hz
    }
}

/// Error generator for one sensor: bias (initial + Gauss–Markov) plus white
/// noise plus vibration.
#[derive(Debug, Clone)]
struct Channel {
    white_sigma: f64,
    bias_init: Vector3<f64>,
    bias_sigma: f64,
    phi: f64,
    bias: Option<Vector3<f64>>,
    white: [GaussianStream; 3],
    bias_streams: [GaussianStream; 3],
    vibration: VibrationSource,
}

impl Channel {
    fn new(density: f64, bias_init: [f64; 3], bias_sigma: f64, vib: VibrationModel, cfg: &ImuConfig, sensor: u64) -> Self {
        Self {
            white_sigma: density * cfg.rate_hz.sqrt(),
            bias_init: Vector3::from(bias_init),
            bias_sigma,
            phi: (-1.0 / (cfg.rate_hz * cfg.correlation_time_s)).exp(),
            bias: None,
            white: std::array::from_fn(|a| GaussianStream::new(cfg.seed, stream_id(sensor, a, WHITE))),
            bias_streams: std::array::from_fn(|a| GaussianStream::new(cfg.seed, stream_id(sensor, a, BIAS))),
            vibration: VibrationSource::new(vib, cfg.rate_hz, cfg.seed, sensor),
        }
    }

    fn bias(&mut self, k: u64) -> Vector3<f64> {
        if self.bias_sigma == 0.0 {
            return self.bias_init;
        }
        let s = self.bias_sigma;
        let next = match self.bias {
            None => Vector3::from_fn(|a, _| s * self.bias_streams[a].normal(0)),
            Some(b) => {
                let q = s * (1.0 - self.phi * self.phi).sqrt();
                Vector3::from_fn(|a, _| self.phi * b[a] + q * self.bias_streams[a].normal(k + 1))
            }
        };
        self.bias = Some(next);
        self.bias_init + next
    }

    fn noise(&mut self, k: u64, t: f64) -> Vector3<f64> {
        let white = if self.white_sigma == 0.0 {
            Vector3::zeros()
        } else {
            Vector3::from_fn(|a, _| self.white_sigma * self.white[a].normal(k))
        };
        white + self.vibration.sample(k, t)
    }
}

/// Sequential IMU synthesizer: call [`ImuSynthesizer::measure`] once per
/// sample in time order.
#[derive(Debug, Clone)]
pub struct ImuSynthesizer {
    gravity: f64,
    k: u64,
    accel: Channel,
    gyro: Channel,
}

impl ImuSynthesizer {
    pub fn new(cfg: &ImuConfig, gravity: f64) -> Result<Self, SensorError> {
        cfg.validate()?;
        if !gravity.is_finite() {
            return Err(SensorError::InvalidConfig("gravity must be finite".into()));
        }
        Ok(Self {
            gravity,
            k: 0,
            accel: Channel::new(cfg.accel_noise_density, cfg.accel_bias_init, cfg.accel_bias_instability, cfg.accel_vibration, cfg, 0),
            gyro: Channel::new(cfg.gyro_noise_density, cfg.gyro_bias_init, cfg.gyro_bias_instability, cfg.gyro_vibration, cfg, 1),
        })
    }

    /// Accelerometer error (bias + noise) for the next sample index.
    pub fn accel_error(&mut self, t: f64) -> Vector3<f64> {
        let k = self.k;
        self.accel.bias(k) + self.accel.noise(k, t)
    }

    pub fn gyro_error(&mut self, t: f64) -> Vector3<f64> {
        let k = self.k;
        self.gyro.bias(k) + self.gyro.noise(k, t)
    }

    pub fn measure(&mut self, pose: &PoseSample) -> ImuSample {
        let (fa, wg) = ideal_imu(pose, self.gravity);
        let accel = fa + self.accel_error(pose.t);
        let gyro = wg + self.gyro_error(pose.t);
        self.k += 1;
        ImuSample { t: pose.t, accel, gyro }
    }

    pub fn samples_emitted(&self) -> u64 {
        self.k
    }
}

/// IMU log over the whole trajectory at `cfg.rate_hz`, starting at its t0.
pub fn synth_imu(traj: &Trajectory, cfg: &ImuConfig, gravity: f64) -> Result<Vec<ImuSample>, SensorError> {
    let mut synth = ImuSynthesizer::new(cfg, gravity)?;
    if traj.duration() < 1.0 / cfg.rate_hz {
        return Err(SensorError::InvalidConfig("trajectory shorter than one IMU period".into()));
    }
    let n = cfg.sample_count(traj.duration());
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let t = traj.t0() + k as f64 / cfg.rate_hz;
        out.push(synth.measure(&traj.sample_pose(t)?));
    }
    Ok(out)
}
