use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::{annotate_frame, write_control_labels, write_tum_poses, DatasetError, DetectionAnnotation};
use crate::reef::ReefScene;
use crate::render::{mount_cameras, render_frame, AccelStructure, CameraRig, CameraRole, FrameBundle, RenderOptions};
use crate::sensors::{scan_sonar, write_imu_csv, write_sonar_csv, ImuConfig, ImuSynthesizer, SonarConfig, WaterProperties};
use crate::trajectory::{quantize_control, ControlLabel, ControlLimits, MotionSource};

pub const FORMAT_VERSION: &str = "1.0";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Everything an export needs besides the scene and the motion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionSpec {
    pub session_id: String,
    pub seed: u64,
    pub rig: CameraRig,
    pub cameras: Vec<CameraRole>,
    pub render: RenderOptions,
    pub imu: ImuConfig,
    pub sonar: SonarConfig,
    pub water: WaterProperties,
    pub gravity: f64,
    pub control_limits: ControlLimits,
    /// IMU and sonar cover `[t_start, t_end)`.
    pub t_start: f64,
    pub t_end: f64,
    pub frame_times: Vec<f64>,
}

/// `floor(duration·fps)` frames at `t0 + k/fps`.
pub fn uniform_frame_times(t0: f64, duration: f64, fps: f64) -> Vec<f64> {
    let n = (duration * fps + 1e-9).floor().max(0.0) as usize;
    (0..n).map(|k| t0 + k as f64 / fps).collect()
}

impl SessionSpec {
    pub fn validate(&self, motion: &dyn MotionSource) -> Result<(), DatasetError> {
        let bad = |m: String| Err(DatasetError::Config(m));
        if self.session_id.is_empty() || self.session_id.contains(['/', '\\']) || self.session_id.starts_with('.') {
            return bad(format!("session_id {:?} is not a plain directory name", self.session_id));
        }
        if self.cameras.is_empty() {
            return bad("at least one camera role is required".into());
        }
        self.rig.validate().map_err(|e| DatasetError::Config(e.to_string()))?;
        self.imu.validate().map_err(|e| DatasetError::Config(e.to_string()))?;
        self.sonar.validate().map_err(|e| DatasetError::Config(e.to_string()))?;
        self.control_limits.validate().map_err(|e| DatasetError::Config(e.to_string()))?;
        if !(self.t_start.is_finite() && self.t_end > self.t_start) {
            return bad("session span must satisfy t_start < t_end".into());
        }
        if self.t_start < motion.t0() || self.t_end > motion.t1() + 1e-9 {
            return bad(format!(
                "session span [{}, {}] leaves the motion range [{}, {}]",
                self.t_start,
                self.t_end,
                motion.t0(),
                motion.t1()
            ));
        }
        if self.frame_times.windows(2).any(|w| !(w[1] > w[0])) {
            return bad("frame times must be strictly increasing".into());
        }
        if self.frame_times.iter().any(|&t| t < self.t_start || t > self.t_end) {
            return bad("frame times must lie inside the session span".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct FrameFiles {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rgb: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mask: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameEntry {
    pub frame_id: u64,
    pub t: f64,
    pub cameras: BTreeMap<CameraRole, FrameFiles>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LogFiles {
    pub imu: String,
    pub sonar: String,
    pub poses: String,
    pub labels: String,
    pub annotations: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionManifest {
    pub format_version: String,
    pub session_id: String,
    pub seed: u64,
    pub complete: bool,
    pub scene: String,
    pub spec: SessionSpec,
    pub annotation_camera: CameraRole,
    pub frames: Vec<FrameEntry>,
    pub logs: LogFiles,
    /// sha256 of every file in the session except the manifest itself.
    pub checksums: BTreeMap<String, String>,
    pub notes: Vec<String>,
}

impl SessionManifest {
    pub fn load(session_dir: &Path) -> Result<Self, DatasetError> {
        let p = session_dir.join(MANIFEST_FILE);
        let text = fs::read_to_string(&p).map_err(|e| DatasetError::io(&p, e))?;
        serde_json::from_str(&text).map_err(|e| DatasetError::Format(format!("{}: {e}", p.display())))
    }

    /// Every path the manifest mentions, relative to the session dir.
    pub fn referenced_files(&self) -> Vec<String> {
        let mut out = vec![self.scene.clone()];
        for f in &self.frames {
            for files in f.cameras.values() {
                out.extend([&files.rgb, &files.depth, &files.mask].into_iter().flatten().cloned());
            }
        }
        let l = &self.logs;
        out.extend([&l.imu, &l.sonar, &l.poses, &l.labels, &l.annotations].map(String::clone));
        out.extend(self.checksums.keys().cloned());
        out.sort();
        out.dedup();
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct FrameAnnotations {
    frame_id: u64,
    t: f64,
    width: usize,
    height: usize,
    annotations: Vec<DetectionAnnotation>,
}

fn timestamp_name(t: f64) -> String {
    format!("{t:.9}")
}

struct Writer {
    root: PathBuf,
}

impl Writer {
    fn write(&self, rel: &str, bytes: &[u8]) -> Result<(), DatasetError> {
        let p = self.root.join(rel);
        fs::write(&p, bytes).map_err(|e| DatasetError::io(&p, e))
    }

    fn write_with<F>(&self, rel: &str, f: F) -> Result<(), DatasetError>
    where
        F: FnOnce(&mut BufWriter<fs::File>) -> Result<(), DatasetError>,
    {
        let p = self.root.join(rel);
        let file = fs::File::create(&p).map_err(|e| DatasetError::io(&p, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w)?;
        std::io::Write::flush(&mut w).map_err(|e| DatasetError::io(&p, e))
    }
}

/// Renders and logs a full session under `out_dir/<session_id>/`. An
/// existing directory for the same session id is replaced.
pub fn export_session(
    scene: &ReefScene,
    accel: &AccelStructure,
    motion: &dyn MotionSource,
    spec: &SessionSpec,
    out_dir: &Path,
) -> Result<SessionManifest, DatasetError> {
    export_session_with_progress(scene, accel, motion, spec, out_dir, &mut |_, _| {})
}

/// As [`export_session`], calling `progress(done, total)` after each frame.
pub fn export_session_with_progress(
    scene: &ReefScene,
    accel: &AccelStructure,
    motion: &dyn MotionSource,
    spec: &SessionSpec,
    out_dir: &Path,
    progress: &mut dyn FnMut(usize, usize),
) -> Result<SessionManifest, DatasetError> {
    spec.validate(motion)?;
    let root = out_dir.join(&spec.session_id);
    if root.exists() {
        fs::remove_dir_all(&root).map_err(|e| DatasetError::io(&root, e))?;
    }
    let mut roles = spec.cameras.clone();
    roles.sort();
    roles.dedup();
    for r in &roles {
        let d = root.join("frames").join(r.name());
        fs::create_dir_all(&d).map_err(|e| DatasetError::io(&d, e))?;
    }
    let w = Writer { root: root.clone() };
    let annotation_camera = if roles.contains(&CameraRole::FrontDepth) { CameraRole::FrontDepth } else { roles[0] };
    let logs = LogFiles {
        imu: "imu.csv".into(),
        sonar: "sonar.csv".into(),
        poses: "poses_gt.tum".into(),
        labels: "labels.csv".into(),
        annotations: "annotations.json".into(),
    };
    let mut manifest = SessionManifest {
        format_version: FORMAT_VERSION.into(),
        session_id: spec.session_id.clone(),
        seed: spec.seed,
        complete: false,
        scene: "scene.json".into(),
        spec: spec.clone(),
        annotation_camera,
        frames: Vec::new(),
        logs,
        checksums: BTreeMap::new(),
        notes: vec![
            "depth PFM stores Euclidean ray distance in meters; pixels that hit nothing are stored as 0".into(),
            "mask PGM holds 16-bit instance ids; 0 is the seabed and 65535 marks a miss".into(),
        ],
    };
    write_manifest(&w, &manifest)?;

    scene.save(&root).map_err(|e| DatasetError::Export(e.to_string()))?;

    let n = spec.frame_times.len();
    let mut poses = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    let mut annotations = Vec::with_capacity(n);
    for (k, &t) in spec.frame_times.iter().enumerate() {
        let pose = motion.pose_at(t)?;
        let cmd = motion.command_at(t)?;
        labels.push((k as u64, quantize_control(&cmd, spec.control_limits.max_pitch_rate, spec.control_limits.max_yaw_rate)));
        poses.push(pose);
        let cams = mount_cameras(&pose.isometry(), &spec.rig)?;
        let mut entry = FrameEntry {
            frame_id: k as u64,
            t,
            cameras: BTreeMap::new(),
        };
        let stem = timestamp_name(t);
        // Front RGB and front depth share a pose, so one render serves both.
        let mut front: Option<FrameBundle> = None;
        for &role in &roles {
            let cam = cams.iter().find(|c| c.role == role).expect("rig mounts every role");
            let bundle = match role {
                CameraRole::FrontFacing | CameraRole::FrontDepth => match &front {
                    Some(b) => b.clone(),
                    None => {
                        let b = render_frame(scene, accel, cam, t, &spec.render)?;
                        front = Some(b.clone());
                        b
                    }
                },
                _ => render_frame(scene, accel, cam, t, &spec.render)?,
            };
            let dir = format!("frames/{}", role.name());
            let mut files = FrameFiles::default();
            if role == CameraRole::FrontDepth {
                let depth = format!("{dir}/{stem}.pfm");
                let mask = format!("{dir}/{stem}.pgm");
                w.write(&depth, &bundle.depth_pfm()?)?;
                w.write(&mask, &bundle.instance_pgm()?)?;
                files.depth = Some(depth);
                files.mask = Some(mask);
            } else {
                let rgb = format!("{dir}/{stem}.ppm");
                w.write(&rgb, &bundle.to_ppm()?)?;
                files.rgb = Some(rgb);
            }
            if role == annotation_camera {
                annotations.push(FrameAnnotations {
                    frame_id: k as u64,
                    t,
                    width: bundle.width,
                    height: bundle.height,
                    annotations: annotate_frame(k as u64, &bundle.instance, bundle.width, bundle.height, scene)?,
                });
            }
            entry.cameras.insert(role, files);
        }
        manifest.frames.push(entry);
        progress(k + 1, n);
    }

    let span = spec.t_end - spec.t_start;
    let mut synth = ImuSynthesizer::new(&spec.imu, spec.gravity)?;
    let n_imu = spec.imu.sample_count(span);
    let mut imu = Vec::with_capacity(n_imu);
    for k in 0..n_imu {
        let t = spec.t_start + k as f64 / spec.imu.rate_hz;
        imu.push(synth.measure(&motion.pose_at(t)?));
    }
    w.write_with(&manifest.logs.imu, |f| write_imu_csv(f, &imu).map_err(|e| DatasetError::io("imu.csv", e)))?;

    let n_sonar = (span * spec.sonar.rate_hz + 1e-9).floor() as usize;
    let mut sonar = Vec::new();
    for k in 0..n_sonar {
        let t = spec.t_start + k as f64 / spec.sonar.rate_hz;
        let pose = motion.pose_at(t)?;
        sonar.extend(scan_sonar(accel, &pose.isometry(), &spec.sonar, &spec.water, t)?);
    }
    w.write_with(&manifest.logs.sonar, |f| write_sonar_csv(f, &sonar).map_err(|e| DatasetError::io("sonar.csv", e)))?;
    w.write_with(&manifest.logs.poses, |f| write_tum_poses(f, &poses))?;
    w.write_with(&manifest.logs.labels, |f| write_control_labels(f, &labels))?;
    let json = serde_json::to_vec_pretty(&annotations).map_err(|e| DatasetError::Format(e.to_string()))?;
    w.write(&manifest.logs.annotations, &json)?;

    manifest.checksums = checksum_tree(&root)?;
    manifest.complete = true;
    write_manifest(&w, &manifest)?;
    Ok(manifest)
}

fn write_manifest(w: &Writer, m: &SessionManifest) -> Result<(), DatasetError> {
    let json = serde_json::to_vec_pretty(m).map_err(|e| DatasetError::Format(e.to_string()))?;
    w.write(MANIFEST_FILE, &json)
}

/// Relative path (with `/` separators) to sha256 hex for every file under
/// `root` except the manifest.
pub fn checksum_tree(root: &Path) -> Result<BTreeMap<String, String>, DatasetError> {
    let mut out = BTreeMap::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).map_err(|e| DatasetError::io(&dir, e))? {
            let path = entry.map_err(|e| DatasetError::io(&dir, e))?.path();
            if path.is_dir() {
                stack.push(path);
                continue;
            }
            let rel = path
                .strip_prefix(root)
                .expect("walked from root")
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            if rel == MANIFEST_FILE {
                continue;
            }
            let bytes = fs::read(&path).map_err(|e| DatasetError::io(&path, e))?;
            let digest = Sha256::digest(&bytes);
            out.insert(rel, digest.iter().map(|b| format!("{b:02x}")).collect());
        }
    }
    Ok(out)
}

/// Label rows for a set of frame times, as an export would write them.
pub fn labels_for(motion: &dyn MotionSource, frame_times: &[f64], limits: &ControlLimits) -> Result<Vec<ControlLabel>, DatasetError> {
    frame_times
        .iter()
        .map(|&t| Ok(quantize_control(&motion.command_at(t)?, limits.max_pitch_rate, limits.max_yaw_rate)))
        .collect()
}
