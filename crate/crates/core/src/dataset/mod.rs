//! Session export: rendered frames, depth and instance masks, IMU and sonar
//! logs, TUM ground-truth poses, control labels and per-frame detection
//! annotations, bound together by a checksummed manifest.

mod annotate;
mod export;
mod labels;
mod rle;
mod tum;

pub use annotate::{annotate_frame, DetectionAnnotation};
pub use export::{
    checksum_tree, export_session, export_session_with_progress, labels_for, uniform_frame_times, FrameEntry, FrameFiles,
    LogFiles, SessionManifest, SessionSpec, FORMAT_VERSION, MANIFEST_FILE,
};
pub use labels::{write_control_labels, LABELS_CSV_HEADER};
pub use rle::{rle_decode, rle_encode};
pub use tum::{format_g9, read_tum_poses, tum_line, write_tum_poses};

use std::path::Path;

use crate::netpbm::NetpbmError;
use crate::render::RenderError;
use crate::sensors::SensorError;
use crate::trajectory::TrajectoryError;

#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("invalid session: {0}")]
    Config(String),
    #[error("export failed: {0}")]
    Export(String),
    #[error("annotation failed: {0}")]
    Annotation(String),
    #[error("format error: {0}")]
    Format(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Render(#[from] RenderError),
    #[error(transparent)]
    Sensor(#[from] SensorError),
    #[error(transparent)]
    Trajectory(#[from] TrajectoryError),
    #[error(transparent)]
    Netpbm(#[from] NetpbmError),
}

impl DatasetError {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        DatasetError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }
}
