//! One JSON document configures a whole run. Sub-seeds are derived from the
//! root `seed` by component name, so adding a component never shifts the
//! randomness of the others.

use std::path::{Path, PathBuf};

use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use crate::dataset::{uniform_frame_times, SessionSpec};
use crate::reef::{
    compose_scene, generate_heightfield, poisson_disk_place, rock_mesh, turbidity_to_medium, ClassId, Heightfield, Lighting,
    PlacementConfig, ReefError, ReefScene, Rect, DEFAULT_WATER_COLOR,
};
use crate::render::{CameraRig, CameraRole, RenderOptions};
use crate::rng::{derive_seed, derive_seed_indexed};
use crate::sensors::{ImuConfig, ImuPreset, SonarConfig, SonarMode, VibrationModel, WaterProperties, STANDARD_GRAVITY};
use crate::shellgen::{default_taper, generate_shell, OysterShellSpec, TriangleMesh};
use crate::trajectory::{fit_path, lawnmower_pattern, ControlLimits, MotionSource, Trajectory};

pub const SEED_ENV: &str = "REEFSIM_SEED";

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("config parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

fn invalid(field: &str, message: impl ToString) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShellSettings {
    pub n_layers: usize,
    pub base_length: f64,
    pub base_width: f64,
    pub total_height: f64,
    /// Defaults to the built-in bump profile for `n_layers`.
    pub taper_profile: Option<Vec<f64>>,
    pub perturbation_amplitude: f64,
    pub samples_per_layer: usize,
    /// Distinct shells shared round-robin by the placed oysters.
    pub library_size: usize,
}

impl Default for ShellSettings {
    fn default() -> Self {
        let s = OysterShellSpec::default();
        Self {
            n_layers: s.n_layers,
            base_length: s.base_length,
            base_width: s.base_width,
            total_height: s.total_height,
            taper_profile: None,
            perturbation_amplitude: s.perturbation_amplitude,
            samples_per_layer: crate::shellgen::DEFAULT_SAMPLES_PER_LAYER,
            library_size: 8,
        }
    }
}

impl ShellSettings {
    pub fn spec(&self, seed: u64) -> OysterShellSpec {
        OysterShellSpec {
            n_layers: self.n_layers,
            base_length: self.base_length,
            base_width: self.base_width,
            total_height: self.total_height,
            taper_profile: self.taper_profile.clone().unwrap_or_else(|| default_taper(self.n_layers)),
            perturbation_amplitude: self.perturbation_amplitude,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TerrainSettings {
    pub nx: usize,
    pub ny: usize,
    pub cell_size: f64,
    pub amplitude: f64,
    pub octaves: u32,
}

impl Default for TerrainSettings {
    fn default() -> Self {
        Self {
            nx: 97,
            ny: 97,
            cell_size: 0.125,
            amplitude: 0.15,
            octaves: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlacementSettings {
    pub oyster_density: f64,
    pub rock_density: f64,
    pub stone_density: f64,
    pub min_spacing: f64,
    pub region: Rect,
}

impl Default for PlacementSettings {
    fn default() -> Self {
        Self {
            oyster_density: 1.0,
            rock_density: 0.05,
            stone_density: 0.2,
            min_spacing: 0.12,
            region: Rect::new([-5.0, -5.0], [5.0, 5.0]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MediumSettings {
    pub turbidity: f64,
    pub water_color: [f64; 3],
    pub illumination: f64,
    /// When set, `render-dataset` writes one session per turbidity.
    pub sweep: Option<Vec<f64>>,
}

impl Default for MediumSettings {
    fn default() -> Self {
        Self {
            turbidity: 1.0,
            water_color: DEFAULT_WATER_COLOR,
            illumination: 1.0,
            sweep: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraSettings {
    pub rig: CameraRig,
    pub roles: Vec<CameraRole>,
    pub render: RenderOptions,
}

impl Default for CameraSettings {
    fn default() -> Self {
        Self {
            rig: CameraRig::default(),
            roles: vec![CameraRole::DownFacing, CameraRole::FrontFacing, CameraRole::FrontDepth],
            render: RenderOptions::default(),
        }
    }
}

/// Path the ROV follows in batch sessions; it starts at t = 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TrajectorySettings {
    Lawnmower {
        /// Defaults to the placement region.
        #[serde(default)]
        region: Option<Rect>,
        track_spacing: f64,
        altitude: f64,
        speed: f64,
    },
    Waypoints {
        points: Vec<[f64; 3]>,
        speed: f64,
    },
    Hover {
        position: [f64; 3],
        #[serde(default)]
        yaw: f64,
        duration_s: f64,
    },
}

impl Default for TrajectorySettings {
    fn default() -> Self {
        TrajectorySettings::Lawnmower {
            region: None,
            track_spacing: 2.0,
            altitude: 1.2,
            speed: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ImuSettings {
    pub preset: ImuPreset,
    pub rate_hz: f64,
    /// Overrides for the preset values.
    pub accel_noise_density: Option<f64>,
    pub gyro_noise_density: Option<f64>,
    pub accel_bias_instability: Option<f64>,
    pub gyro_bias_instability: Option<f64>,
    pub accel_bias_init: [f64; 3],
    pub gyro_bias_init: [f64; 3],
    pub correlation_time_s: f64,
    pub accel_vibration: VibrationModel,
    pub gyro_vibration: VibrationModel,
}

impl Default for ImuSettings {
    fn default() -> Self {
        Self {
            preset: ImuPreset::Medium,
            rate_hz: 200.0,
            accel_noise_density: None,
            gyro_noise_density: None,
            accel_bias_instability: None,
            gyro_bias_instability: None,
            accel_bias_init: [0.0; 3],
            gyro_bias_init: [0.0; 3],
            correlation_time_s: 100.0,
            accel_vibration: VibrationModel::None,
            gyro_vibration: VibrationModel::None,
        }
    }
}

impl ImuSettings {
    pub fn to_config(&self, seed: u64) -> ImuConfig {
        let mut c = ImuConfig::from_preset(self.preset, self.rate_hz, seed);
        if let Some(v) = self.accel_noise_density {
            c.accel_noise_density = v;
            c.accel_bias_instability = 0.1 * v;
        }
        if let Some(v) = self.gyro_noise_density {
            c.gyro_noise_density = v;
            c.gyro_bias_instability = 0.1 * v;
        }
        c.accel_bias_instability = self.accel_bias_instability.unwrap_or(c.accel_bias_instability);
        c.gyro_bias_instability = self.gyro_bias_instability.unwrap_or(c.gyro_bias_instability);
        c.accel_bias_init = self.accel_bias_init;
        c.gyro_bias_init = self.gyro_bias_init;
        c.correlation_time_s = self.correlation_time_s;
        c.accel_vibration = self.accel_vibration;
        c.gyro_vibration = self.gyro_vibration;
        c
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SonarSettings {
    pub mode: SonarMode,
    pub beams: u32,
    pub fan_aperture_deg: f64,
    pub max_range_m: f64,
    pub range_noise_sigma_rel: f64,
    pub dropout_prob: f64,
    pub rate_hz: f64,
}

impl Default for SonarSettings {
    fn default() -> Self {
        let c = SonarConfig::default();
        Self {
            mode: c.mode,
            beams: c.beams,
            fan_aperture_deg: c.fan_aperture_deg,
            max_range_m: c.max_range_m,
            range_noise_sigma_rel: c.range_noise_sigma_rel,
            dropout_prob: c.dropout_prob,
            rate_hz: c.rate_hz,
        }
    }
}

impl SonarSettings {
    pub fn to_config(&self, seed: u64) -> SonarConfig {
        SonarConfig {
            mode: self.mode,
            beams: self.beams,
            fan_aperture_deg: self.fan_aperture_deg,
            max_range_m: self.max_range_m,
            range_noise_sigma_rel: self.range_noise_sigma_rel,
            dropout_prob: self.dropout_prob,
            rate_hz: self.rate_hz,
            seed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleSettings {
    /// Session length; the whole trajectory when absent.
    pub duration_s: Option<f64>,
    pub frame_rate_hz: f64,
    pub gravity: f64,
}

impl Default for ScheduleSettings {
    fn default() -> Self {
        Self {
            duration_s: None,
            frame_rate_hz: 10.0,
            gravity: STANDARD_GRAVITY,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TeleopSettings {
    pub tick_hz: f64,
    pub preview_width: usize,
    pub preview_height: usize,
    /// Seconds of client silence before the command falls back to zero.
    pub timeout_s: f64,
    pub start_position: [f64; 3],
    pub start_yaw: f64,
}

impl Default for TeleopSettings {
    fn default() -> Self {
        Self {
            tick_hz: 10.0,
            preview_width: 320,
            preview_height: 240,
            timeout_s: 5.0,
            start_position: [0.0, 0.0, 1.2],
            start_yaw: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    #[serde(default = "default_session_id")]
    pub session_id: String,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default)]
    pub shells: ShellSettings,
    #[serde(default)]
    pub terrain: TerrainSettings,
    #[serde(default)]
    pub placement: PlacementSettings,
    #[serde(default)]
    pub medium: MediumSettings,
    #[serde(default)]
    pub lighting: Lighting,
    #[serde(default)]
    pub cameras: CameraSettings,
    #[serde(default)]
    pub trajectory: TrajectorySettings,
    #[serde(default)]
    pub imu: ImuSettings,
    #[serde(default)]
    pub sonar: SonarSettings,
    #[serde(default)]
    pub water: WaterProperties,
    #[serde(default)]
    pub schedule: ScheduleSettings,
    #[serde(default)]
    pub control_limits: ControlLimits,
    #[serde(default)]
    pub teleop: TeleopSettings,
}

fn default_session_id() -> String {
    "session".into()
}

impl RunConfig {
    pub fn with_seed(seed: u64) -> Self {
        serde_json::from_value(serde_json::json!({ "seed": seed })).expect("defaults deserialize")
    }

    pub fn from_json_str(s: &str) -> Result<Self, ConfigError> {
        serde_json::from_str(s).map_err(|e| ConfigError::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    pub fn from_path(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_json_str(&text)
    }

    /// Applies `REEFSIM_SEED` when set.
    pub fn apply_env(&mut self) -> Result<(), ConfigError> {
        if let Ok(v) = std::env::var(SEED_ENV) {
            self.seed = v.trim().parse().map_err(|_| invalid(SEED_ENV, format!("{v:?} is not a u64")))?;
        }
        Ok(())
    }

    pub fn sub_seed(&self, component: &str) -> u64 {
        derive_seed(self.seed, component)
    }

    pub fn shell_seed(&self, index: u64) -> u64 {
        derive_seed_indexed(self.seed, "shell", index)
    }

    /// Checks every sub-config without generating anything.
    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.session_id.is_empty() || self.session_id.contains(['/', '\\']) || self.session_id.starts_with('.') {
            return Err(invalid("session_id", "must be a plain directory name"));
        }
        self.shells.spec(0).validate().map_err(|e| invalid("shells", e))?;
        if self.shells.samples_per_layer < 8 {
            return Err(invalid("shells.samples_per_layer", "must be >= 8"));
        }
        if self.shells.library_size == 0 {
            return Err(invalid("shells.library_size", "must be >= 1"));
        }
        let t = &self.terrain;
        if t.nx < 2 || t.ny < 2 || !(t.cell_size > 0.0) || !(t.amplitude >= 0.0) || t.octaves == 0 {
            return Err(invalid("terrain", "needs nx, ny >= 2, cell_size > 0, amplitude >= 0, octaves >= 1"));
        }
        self.placement_config().validate().map_err(|e| invalid("placement", e))?;
        let m = &self.medium;
        for (k, &tb) in std::iter::once(&m.turbidity).chain(m.sweep.iter().flatten()).enumerate() {
            let field = if k == 0 { "medium.turbidity".to_string() } else { format!("medium.sweep[{}]", k - 1) };
            turbidity_to_medium(tb, m.water_color).map_err(|e| invalid(&field, e))?;
        }
        if !(m.illumination.is_finite() && m.illumination >= 0.0) {
            return Err(invalid("medium.illumination", "must be >= 0"));
        }
        if m.sweep.as_ref().is_some_and(|s| s.is_empty()) {
            return Err(invalid("medium.sweep", "must not be empty when given"));
        }
        self.lighting.validate().map_err(|e| invalid("lighting", e))?;
        self.cameras.rig.validate().map_err(|e| invalid("cameras.rig", e))?;
        if self.cameras.roles.is_empty() {
            return Err(invalid("cameras.roles", "at least one camera is required"));
        }
        if self.cameras.render.supersample == 0 {
            return Err(invalid("cameras.render.supersample", "must be >= 1"));
        }
        self.validate_trajectory()?;
        self.imu.to_config(0).validate().map_err(|e| invalid("imu", e))?;
        self.sonar.to_config(0).validate().map_err(|e| invalid("sonar", e))?;
        let w = &self.water;
        if ![w.temperature_c, w.salinity_ppt, w.depth_m].iter().all(|v| v.is_finite()) {
            return Err(invalid("water", "values must be finite"));
        }
        let s = &self.schedule;
        if !(s.frame_rate_hz.is_finite() && s.frame_rate_hz > 0.0) {
            return Err(invalid("schedule.frame_rate_hz", "must be > 0"));
        }
        if s.duration_s.is_some_and(|d| !(d.is_finite() && d > 0.0)) {
            return Err(invalid("schedule.duration_s", "must be > 0"));
        }
        if !s.gravity.is_finite() {
            return Err(invalid("schedule.gravity", "must be finite"));
        }
        self.control_limits.validate().map_err(|e| invalid("control_limits", e))?;
        let tp = &self.teleop;
        if !(tp.tick_hz.is_finite() && tp.tick_hz > 0.0) {
            return Err(invalid("teleop.tick_hz", "must be > 0"));
        }
        if tp.preview_width == 0 || tp.preview_height == 0 {
            return Err(invalid("teleop.preview_width", "preview size must be positive"));
        }
        if !(tp.timeout_s.is_finite() && tp.timeout_s > 0.0) {
            return Err(invalid("teleop.timeout_s", "must be > 0"));
        }
        if !tp.start_position.iter().chain([&tp.start_yaw]).all(|v| v.is_finite()) {
            return Err(invalid("teleop.start_position", "must be finite"));
        }
        Ok(())
    }

    fn validate_trajectory(&self) -> Result<(), ConfigError> {
        let f = "trajectory";
        match &self.trajectory {
            TrajectorySettings::Lawnmower {
                region,
                track_spacing,
                altitude,
                speed,
            } => {
                let r = region.unwrap_or(self.placement.region);
                lawnmower_pattern(&r, *track_spacing, *altitude).map_err(|e| invalid(f, e))?;
                if !(speed.is_finite() && *speed > 0.0) {
                    return Err(invalid("trajectory.speed", "must be > 0"));
                }
            }
            TrajectorySettings::Waypoints { points, speed } => {
                let pts: Vec<Point3<f64>> = points.iter().map(|p| Point3::from(*p)).collect();
                fit_path(&pts, *speed).map_err(|e| invalid(f, e))?;
            }
            TrajectorySettings::Hover {
                position,
                yaw,
                duration_s,
            } => {
                Trajectory::hover(Point3::from(*position), *yaw, 0.0, *duration_s).map_err(|e| invalid(f, e))?;
            }
        }
        Ok(())
    }

    pub fn placement_config(&self) -> PlacementConfig {
        let p = &self.placement;
        PlacementConfig {
            oyster_density: p.oyster_density,
            rock_density: p.rock_density,
            stone_density: p.stone_density,
            min_spacing: p.min_spacing,
            region: p.region,
            seed: self.sub_seed("placement"),
        }
    }

    pub fn heightfield(&self) -> Result<Heightfield, ReefError> {
        let t = &self.terrain;
        generate_heightfield(t.nx, t.ny, t.cell_size, t.amplitude, t.octaves, self.sub_seed("terrain"))
    }

    /// Oyster shells plus one rock and one stone mesh per library slot.
    pub fn mesh_library(&self) -> Result<Vec<TriangleMesh>, ReefError> {
        let n = self.shells.library_size as u64;
        let mut lib = Vec::with_capacity(3 * n as usize);
        for k in 0..n {
            let shell = generate_shell(&self.shells.spec(self.shell_seed(k)), self.shells.samples_per_layer)
                .map_err(|e| ReefError::InvalidParameter(e.to_string()))?;
            lib.push(shell);
        }
        for k in 0..n {
            let s = derive_seed_indexed(self.seed, "rock", k);
            lib.push(rock_mesh(0.25, 0.55, 0.3, s, ClassId::Rock));
            let s = derive_seed_indexed(self.seed, "stone", k);
            lib.push(rock_mesh(0.05, 0.7, 0.25, s, ClassId::Stone));
        }
        Ok(lib)
    }

    pub fn build_scene(&self) -> Result<ReefScene, ReefError> {
        self.build_scene_with_turbidity(self.medium.turbidity)
    }

    pub fn build_scene_with_turbidity(&self, turbidity: f64) -> Result<ReefScene, ReefError> {
        let hf = self.heightfield()?;
        let placements = poisson_disk_place(&hf, &self.placement_config())?;
        let lib = self.mesh_library()?;
        let medium = turbidity_to_medium(turbidity, self.medium.water_color)?.with_illumination(self.medium.illumination);
        compose_scene(&hf, &placements, &lib, medium, self.lighting, self.sub_seed("scene"))
    }

    pub fn build_trajectory(&self) -> Result<Trajectory, ConfigError> {
        let f = "trajectory";
        match &self.trajectory {
            TrajectorySettings::Lawnmower {
                region,
                track_spacing,
                altitude,
                speed,
            } => {
                let r = region.unwrap_or(self.placement.region);
                let wps = lawnmower_pattern(&r, *track_spacing, *altitude).map_err(|e| invalid(f, e))?;
                fit_path(&wps, *speed).map_err(|e| invalid(f, e))
            }
            TrajectorySettings::Waypoints { points, speed } => {
                let pts: Vec<Point3<f64>> = points.iter().map(|p| Point3::from(*p)).collect();
                fit_path(&pts, *speed).map_err(|e| invalid(f, e))
            }
            TrajectorySettings::Hover {
                position,
                yaw,
                duration_s,
            } => Trajectory::hover(Point3::from(*position), *yaw, 0.0, *duration_s).map_err(|e| invalid(f, e)),
        }
    }

    /// Export settings for a batch session over `motion`.
    pub fn session_spec(&self, motion: &dyn MotionSource, session_id: &str) -> Result<SessionSpec, ConfigError> {
        let t0 = motion.t0();
        let duration = match self.schedule.duration_s {
            Some(d) if d > motion.duration() + 1e-9 => {
                return Err(invalid(
                    "schedule.duration_s",
                    format!("{d} s exceeds the trajectory length of {:.3} s", motion.duration()),
                ))
            }
            Some(d) => d,
            None => motion.duration(),
        };
        Ok(self.session_spec_for_frames(session_id, t0, t0 + duration, uniform_frame_times(t0, duration, self.schedule.frame_rate_hz)))
    }

    /// Export settings with an explicit span and frame list.
    pub fn session_spec_for_frames(&self, session_id: &str, t_start: f64, t_end: f64, frame_times: Vec<f64>) -> SessionSpec {
        SessionSpec {
            session_id: session_id.into(),
            seed: self.seed,
            rig: self.cameras.rig,
            cameras: self.cameras.roles.clone(),
            render: self.cameras.render,
            imu: self.imu.to_config(self.sub_seed("imu")),
            sonar: self.sonar.to_config(self.sub_seed("sonar")),
            water: self.water,
            gravity: self.schedule.gravity,
            control_limits: self.control_limits,
            t_start,
            t_end,
            frame_times,
        }
    }

    /// (session id, turbidity) for each session a batch run writes.
    pub fn sessions(&self) -> Vec<(String, f64)> {
        match &self.medium.sweep {
            None => vec![(self.session_id.clone(), self.medium.turbidity)],
            Some(s) => s.iter().map(|&t| (format!("{}_turbidity_{t}", self.session_id), t)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = RunConfig::with_seed(1);
        c.validate().unwrap();
        assert_eq!(c.session_id, "session");
        assert_eq!(c.sessions(), vec![("session".to_string(), 1.0)]);
    }

    #[test]
    fn unknown_field_is_reported() {
        let e = RunConfig::from_json_str(r#"{"seed": 1, "medium": {"turbidty": 2}}"#).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("unknown field") && msg.contains("turbidty"), "{msg}");
        assert!(matches!(e, ConfigError::Parse { line: 1, .. }));
    }

    #[test]
    fn negative_turbidity_names_the_field() {
        let c = RunConfig::from_json_str(r#"{"seed": 1, "medium": {"turbidity": -1}}"#).unwrap();
        let e = c.validate().unwrap_err();
        assert!(e.to_string().starts_with("medium.turbidity:"), "{e}");
        let c = RunConfig::from_json_str(r#"{"seed": 1, "medium": {"sweep": [0, -2]}}"#).unwrap();
        assert!(c.validate().unwrap_err().to_string().starts_with("medium.sweep[1]"));
    }

    #[test]
    fn sub_seeds_are_independent_of_each_other() {
        let a = RunConfig::with_seed(7);
        assert_ne!(a.sub_seed("imu"), a.sub_seed("sonar"));
        assert_eq!(a.sub_seed("imu"), RunConfig::with_seed(7).sub_seed("imu"));
        assert_ne!(a.sub_seed("imu"), RunConfig::with_seed(8).sub_seed("imu"));
    }

    #[test]
    fn trajectory_kinds_parse() {
        let c = RunConfig::from_json_str(
            r#"{"seed": 1, "trajectory": {"kind": "hover", "position": [0, 0, 1], "duration_s": 2}}"#,
        )
        .unwrap();
        c.validate().unwrap();
        assert_eq!(c.build_trajectory().unwrap().duration(), 2.0);
        let c = RunConfig::from_json_str(
            r#"{"seed": 1, "trajectory": {"kind": "waypoints", "points": [[0,0,1],[0,0,1]], "speed": 1}}"#,
        )
        .unwrap();
        assert!(c.validate().unwrap_err().to_string().starts_with("trajectory:"));
        let c = RunConfig::with_seed(1);
        let traj = c.build_trajectory().unwrap();
        // 10 m region, 2 m spacing: 6 tracks of 10 m plus 5 crossings of 2 m.
        assert!((traj.chord_length() - 70.0).abs() < 1e-9);
    }

    #[test]
    fn session_spec_counts() {
        let mut c = RunConfig::with_seed(1);
        c.schedule.duration_s = Some(10.0);
        let traj = c.build_trajectory().unwrap();
        let s = c.session_spec(&traj, "x").unwrap();
        assert_eq!(s.frame_times.len(), 100);
        assert_eq!(s.imu.sample_count(s.t_end - s.t_start), 2000);
        c.schedule.duration_s = Some(1e6);
        assert!(c.session_spec(&traj, "x").is_err());
    }

    #[test]
    fn env_seed_parsing() {
        // Only exercises the parse path; the variable itself is process-wide.
        let mut c = RunConfig::with_seed(1);
        if std::env::var(SEED_ENV).is_err() {
            c.apply_env().unwrap();
            assert_eq!(c.seed, 1);
        }
    }

    #[test]
    fn sweep_sessions() {
        let c = RunConfig::from_json_str(r#"{"seed": 1, "medium": {"sweep": [0, 1, 3]}}"#).unwrap();
        let ids: Vec<String> = c.sessions().into_iter().map(|s| s.0).collect();
        assert_eq!(ids, ["session_turbidity_0", "session_turbidity_1", "session_turbidity_3"]);
    }
}
