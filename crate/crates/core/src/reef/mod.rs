//! Reef scenes: seabed terrain, scattered oysters, rocks and stones, and the
//! water the cameras look through.

mod heightfield;
mod medium;
mod placement;
mod rocks;
mod scene;

pub use heightfield::{generate_heightfield, Heightfield};
pub use medium::{turbidity_to_medium, WaterMedium, BASE_BETA_RGB, DEFAULT_WATER_COLOR};
pub use placement::{poisson_disk_place, Placement, PlacementConfig, Rect, ATTEMPTS_PER_TARGET, MAX_TILT_DEG};
pub use rocks::{icosphere, rock_mesh};
pub use scene::{compose_scene, Lighting, ReefScene, SceneInstance, SINK_FRACTION};

use serde::{Deserialize, Serialize};

/// Semantic class stored in instance annotations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
#[repr(u8)]
pub enum ClassId {
    Seabed = 0,
    Oyster = 1,
    Rock = 2,
    Stone = 3,
}

impl ClassId {
    pub const ALL: [ClassId; 4] = [ClassId::Seabed, ClassId::Oyster, ClassId::Rock, ClassId::Stone];

    pub fn from_u8(v: u8) -> Option<Self> {
        Self::ALL.get(v as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            ClassId::Seabed => "seabed",
            ClassId::Oyster => "oyster",
            ClassId::Rock => "rock",
            ClassId::Stone => "stone",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ReefError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("placement infeasible: placed {achieved} of {target} instances")]
    InfeasibleDensity { achieved: usize, target: usize },
    #[error("scene composition: {0}")]
    Composition(String),
    #[error("scene file: {0}")]
    Format(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}
