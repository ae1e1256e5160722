use std::collections::HashMap;

use nalgebra::{Point3, Unit, UnitQuaternion, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{ClassId, Heightfield, ReefError};
use crate::rng::seeded_rng;

/// Dart attempts allowed per requested instance.
pub const ATTEMPTS_PER_TARGET: usize = 30;
/// Placement fails when fewer than this fraction of the target lands.
pub const MIN_FILL_FRACTION: f64 = 0.5;
pub const MAX_TILT_DEG: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rect {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Rect {
    pub fn new(min: [f64; 2], max: [f64; 2]) -> Self {
        Self { min, max }
    }

    pub fn width(&self) -> f64 {
        self.max[0] - self.min[0]
    }

    pub fn height(&self) -> f64 {
        self.max[1] - self.min[1]
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.min[0] && x <= self.max[0] && y >= self.min[1] && y <= self.max[1]
    }

    pub fn is_valid(&self) -> bool {
        self.min.iter().chain(&self.max).all(|v| v.is_finite())
            && self.width() > 0.0
            && self.height() > 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlacementConfig {
    /// Instances per square meter.
    pub oyster_density: f64,
    pub rock_density: f64,
    pub stone_density: f64,
    pub min_spacing: f64,
    pub region: Rect,
    pub seed: u64,
}

impl PlacementConfig {
    pub fn validate(&self) -> Result<(), ReefError> {
        for (name, d) in [
            ("oyster_density", self.oyster_density),
            ("rock_density", self.rock_density),
            ("stone_density", self.stone_density),
        ] {
            if !(d.is_finite() && d >= 0.0) {
                return Err(ReefError::InvalidParameter(format!("{name} must be >= 0")));
            }
        }
        if !(self.min_spacing.is_finite() && self.min_spacing > 0.0) {
            return Err(ReefError::InvalidParameter("min_spacing must be > 0".into()));
        }
        if !self.region.is_valid() {
            return Err(ReefError::InvalidParameter("placement region is degenerate".into()));
        }
        Ok(())
    }

    /// Requested counts per class: rocks, stones, oysters.
    pub fn targets(&self) -> [(ClassId, usize); 3] {
        let a = self.region.area();
        [
            (ClassId::Rock, (self.rock_density * a).round() as usize),
            (ClassId::Stone, (self.stone_density * a).round() as usize),
            (ClassId::Oyster, (self.oyster_density * a).round() as usize),
        ]
    }
}

/// One accepted dart: where an object of `class_id` rests on the seabed.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub class_id: ClassId,
    /// Point on the seabed surface under the object's footprint centre.
    pub position: Point3<f64>,
    pub orientation: UnitQuaternion<f64>,
}

/// Uniform grid keyed by cell, for neighbour lookups at `min_spacing`.
struct SpacingGrid {
    cell: f64,
    cells: HashMap<(i64, i64), Vec<[f64; 2]>>,
}

impl SpacingGrid {
    fn new(cell: f64) -> Self {
        Self {
            cell,
            cells: HashMap::new(),
        }
    }

    fn key(&self, p: [f64; 2]) -> (i64, i64) {
        ((p[0] / self.cell).floor() as i64, (p[1] / self.cell).floor() as i64)
    }

    fn is_clear(&self, p: [f64; 2], min_dist: f64) -> bool {
        let (cx, cy) = self.key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(pts) = self.cells.get(&(cx + dx, cy + dy)) {
                    for q in pts {
                        let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
                        if d2 < min_dist * min_dist {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }

    fn insert(&mut self, p: [f64; 2]) {
        let k = self.key(p);
        self.cells.entry(k).or_default().push(p);
    }
}

/// Dart throwing with rejection: uniform candidates in the region, rejected
/// when closer than `min_spacing` (horizontally) to any accepted centre.
/// Rocks are placed first, then stones, then oysters.
pub fn poisson_disk_place(hf: &Heightfield, cfg: &PlacementConfig) -> Result<Vec<Placement>, ReefError> {
    cfg.validate()?;
    hf.validate()?;
    let targets = cfg.targets();
    let total: usize = targets.iter().map(|t| t.1).sum();
    if total == 0 {
        return Ok(Vec::new());
    }
    let mut rng = seeded_rng(cfg.seed);
    let mut grid = SpacingGrid::new(cfg.min_spacing);
    let mut out = Vec::with_capacity(total);
    let mut attempts_left = ATTEMPTS_PER_TARGET * total;
    let max_tilt = MAX_TILT_DEG.to_radians();

    'classes: for (class_id, count) in targets {
        for _ in 0..count {
            loop {
                if attempts_left == 0 {
                    break 'classes;
                }
                attempts_left -= 1;
                let x = rng.gen_range(cfg.region.min[0]..=cfg.region.max[0]);
                let y = rng.gen_range(cfg.region.min[1]..=cfg.region.max[1]);
                if !grid.is_clear([x, y], cfg.min_spacing) {
                    continue;
                }
                grid.insert([x, y]);
                let yaw = rng.gen_range(0.0..std::f64::consts::TAU);
                let tilt_dir = rng.gen_range(0.0..std::f64::consts::TAU);
                let tilt = rng.gen_range(0.0..=max_tilt);
                let z = hf.height_at(x, y);
                let up = hf.normal_at(x, y);
                let align = UnitQuaternion::rotation_between(&Vector3::z(), &up)
                    .unwrap_or_else(UnitQuaternion::identity);
                let tilt_axis = Unit::new_normalize(Vector3::new(tilt_dir.cos(), tilt_dir.sin(), 0.0));
                let orientation = align
                    * UnitQuaternion::from_axis_angle(&tilt_axis, tilt)
                    * UnitQuaternion::from_axis_angle(&Vector3::z_axis(), yaw);
                out.push(Placement {
                    class_id,
                    position: Point3::new(x, y, z),
                    orientation,
                });
                break;
            }
        }
    }

    if (out.len() as f64) < MIN_FILL_FRACTION * total as f64 {
        return Err(ReefError::InfeasibleDensity {
            achieved: out.len(),
            target: total,
        });
    }
    Ok(out)
}
