//! CPU ray casting of reef scenes.
//!
//! One primary ray per pixel centre, single-bounce Lambertian sun plus
//! ambient light, then Beer–Lambert attenuation toward the water colour.
//! Each frame yields RGB, Euclidean depth and a 16-bit instance mask.

mod bvh;
mod camera;
mod shade;

pub use bvh::{AccelStructure, Aabb, BvhNode, Hit, Ray, Triangle, MAX_LEAF_SIZE, T_MIN};
pub use camera::{look_rotation, mount_cameras, CameraModel, CameraRig, CameraRole};
pub use shade::{albedo, apply_medium, shade_underwater, surface_radiance};

use rayon::prelude::*;

use crate::netpbm::{self, NetpbmError};
use crate::reef::ReefScene;

/// Instance-mask value for pixels that hit nothing.
pub const MISS_INSTANCE: u16 = 65535;

#[derive(Debug, thiserror::Error)]
pub enum RenderError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("scene has no triangles")]
    EmptyScene,
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
}

pub fn build_accel(scene: &ReefScene) -> Result<AccelStructure, RenderError> {
    AccelStructure::from_scene(scene)
}

/// Nearest hit for a unit-direction ray.
pub fn trace_primary(ray: &Ray, accel: &AccelStructure) -> Result<Option<Hit>, RenderError> {
    let ray = Ray::new(ray.origin, ray.dir)?;
    Ok(accel.intersect(&ray))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RenderOptions {
    /// Colour samples per pixel side (n×n grid). Depth and mask always come
    /// from the pixel-centre ray.
    pub supersample: u32,
    pub medium_enabled: bool,
}

impl Default for RenderOptions {
    fn default() -> Self {
        Self {
            supersample: 1,
            medium_enabled: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameBundle {
    pub width: usize,
    pub height: usize,
    /// Row-major, three values per pixel, each in [0, 1].
    pub rgb: Vec<f64>,
    /// Euclidean ray distance in meters; +inf where nothing was hit.
    pub depth: Vec<f64>,
    pub instance: Vec<u16>,
    pub timestamp: f64,
    pub camera_role: CameraRole,
}

impl FrameBundle {
    pub fn index(&self, i: usize, j: usize) -> usize {
        j * self.width + i
    }

    pub fn rgb_at(&self, i: usize, j: usize) -> [f64; 3] {
        let k = 3 * self.index(i, j);
        [self.rgb[k], self.rgb[k + 1], self.rgb[k + 2]]
    }

    pub fn depth_at(&self, i: usize, j: usize) -> f64 {
        self.depth[self.index(i, j)]
    }

    pub fn instance_at(&self, i: usize, j: usize) -> u16 {
        self.instance[self.index(i, j)]
    }

    pub fn rgb8(&self) -> Vec<u8> {
        self.rgb.iter().map(|&v| netpbm::to_u8(v)).collect()
    }

    pub fn to_ppm(&self) -> Result<Vec<u8>, NetpbmError> {
        netpbm::encode_ppm(self.width, self.height, &self.rgb8())
    }

    /// Depth as PFM; misses (+inf) are stored as 0.0.
    pub fn depth_pfm(&self) -> Result<Vec<u8>, NetpbmError> {
        let d: Vec<f32> = self.depth.iter().map(|&v| v as f32).collect();
        netpbm::encode_pfm(self.width, self.height, &d)
    }

    /// Depth in millimetres as 16-bit PGM, saturating at 65534; 65535 marks
    /// a miss.
    pub fn depth_pgm_mm(&self) -> Result<Vec<u8>, NetpbmError> {
        let d: Vec<u16> = self
            .depth
            .iter()
            .map(|&v| if v.is_finite() { (v * 1000.0).round().min(65534.0) as u16 } else { u16::MAX })
            .collect();
        netpbm::encode_pgm16(self.width, self.height, &d)
    }

    pub fn instance_pgm(&self) -> Result<Vec<u8>, NetpbmError> {
        netpbm::encode_pgm16(self.width, self.height, &self.instance)
    }
}

fn shade_ray(scene: &ReefScene, accel: &AccelStructure, ray: &Ray, opts: &RenderOptions) -> ([f64; 3], Option<Hit>) {
    match accel.intersect(ray) {
        Some(hit) => {
            let a = albedo(hit.class_id, hit.instance_id, hit.uv);
            let j = surface_radiance(&hit.normal, &scene.sun_direction, scene.ambient, scene.medium.illumination, a);
            let l = if opts.medium_enabled {
                apply_medium(j, hit.distance, &scene.medium)
            } else {
                j
            };
            (l, Some(hit))
        }
        None => (scene.medium.background_rgb, None),
    }
}

/// Renders one camera. Rows are shaded in parallel but every pixel is a
/// pure function of its coordinates, so output does not depend on threads.
pub fn render_frame(
    scene: &ReefScene,
    accel: &AccelStructure,
    camera: &CameraModel,
    timestamp: f64,
    opts: &RenderOptions,
) -> Result<FrameBundle, RenderError> {
    camera.validate()?;
    if opts.supersample == 0 {
        return Err(RenderError::Domain("supersample must be >= 1".into()));
    }
    let (w, h) = (camera.width, camera.height);
    let mut rgb = vec![0.0; w * h * 3];
    let mut depth = vec![f64::INFINITY; w * h];
    let mut instance = vec![MISS_INSTANCE; w * h];
    let n = opts.supersample as usize;

    rgb.par_chunks_mut(3 * w)
        .zip(depth.par_chunks_mut(w))
        .zip(instance.par_chunks_mut(w))
        .enumerate()
        .for_each(|(j, ((rgb_row, depth_row), inst_row))| {
            for i in 0..w {
                let ray = camera.pixel_ray(i, j);
                let (mut color, hit) = shade_ray(scene, accel, &ray, opts);
                if let Some(hit) = hit {
                    depth_row[i] = hit.distance;
                    inst_row[i] = hit.instance_id as u16;
                }
                if n > 1 {
                    let mut acc = [0.0; 3];
                    for sy in 0..n {
                        for sx in 0..n {
                            let px = i as f64 + (sx as f64 + 0.5) / n as f64;
                            let py = j as f64 + (sy as f64 + 0.5) / n as f64;
                            let (c, _) = shade_ray(scene, accel, &camera.subpixel_ray(px, py), opts);
                            for k in 0..3 {
                                acc[k] += c[k];
                            }
                        }
                    }
                    color = acc.map(|a| a / (n * n) as f64);
                }
                rgb_row[3 * i..3 * i + 3].copy_from_slice(&color);
            }
        });

    Ok(FrameBundle {
        width: w,
        height: h,
        rgb,
        depth,
        instance,
        timestamp,
        camera_role: camera.role,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reef::{compose_scene, turbidity_to_medium, ClassId, Heightfield, Lighting, Placement, WaterMedium, DEFAULT_WATER_COLOR};
    use crate::shellgen::{generate_shell, OysterShellSpec};
    use nalgebra::{Isometry3, Point3, Translation3, UnitQuaternion, Vector3};

    fn flat_scene(medium: WaterMedium, oyster_at: Option<[f64; 2]>) -> ReefScene {
        let hf = Heightfield::flat(41, 41, 0.25).unwrap();
        let lib = vec![generate_shell(&OysterShellSpec::with_seed(1), 32).unwrap()];
        let placements: Vec<Placement> = oyster_at
            .into_iter()
            .map(|p| Placement {
                class_id: ClassId::Oyster,
                position: Point3::new(p[0], p[1], 0.0),
                orientation: UnitQuaternion::identity(),
            })
            .collect();
        compose_scene(&hf, &placements, &lib, medium, Lighting::default(), 0).unwrap()
    }

    fn down_camera(z: f64, w: usize, h: usize) -> CameraModel {
        let rot = look_rotation(-Vector3::z(), Vector3::x()).unwrap();
        CameraModel::new(
            CameraRole::DownFacing,
            Isometry3::from_parts(Translation3::new(0.0, 0.0, z), rot),
            90.0,
            w,
            h,
        )
        .unwrap()
    }

    #[test]
    fn center_depth_above_flat_seabed() {
        let scene = flat_scene(WaterMedium::clear(), None);
        let accel = build_accel(&scene).unwrap();
        let cam = down_camera(1.0, 33, 25);
        let f = render_frame(&scene, &accel, &cam, 0.0, &RenderOptions::default()).unwrap();
        let (i, j) = cam.center_pixel();
        assert!((f.depth_at(i, j) - 1.0).abs() < 1e-6);
        assert_eq!(f.instance_at(i, j), 0);
    }

    #[test]
    fn oyster_under_center_is_in_mask() {
        let scene = flat_scene(WaterMedium::clear(), Some([0.0, 0.0]));
        let accel = build_accel(&scene).unwrap();
        let cam = down_camera(0.6, 21, 21);
        let f = render_frame(&scene, &accel, &cam, 0.0, &RenderOptions::default()).unwrap();
        assert_eq!(f.instance_at(10, 10), 1);
        assert!(f.depth_at(10, 10) < 0.6);
        assert!(f.instance.iter().all(|&id| id <= 1));
    }

    #[test]
    fn misses_get_background_and_sentinels() {
        let m = turbidity_to_medium(1.0, DEFAULT_WATER_COLOR).unwrap();
        let scene = flat_scene(m, None);
        let accel = build_accel(&scene).unwrap();
        let up = look_rotation(Vector3::z(), Vector3::x()).unwrap();
        let cam = CameraModel::new(CameraRole::FrontFacing, Isometry3::from_parts(Translation3::new(0.0, 0.0, 1.0), up), 60.0, 8, 6).unwrap();
        let f = render_frame(&scene, &accel, &cam, 2.5, &RenderOptions::default()).unwrap();
        assert!(f.depth.iter().all(|d| d.is_infinite()));
        assert!(f.instance.iter().all(|&i| i == MISS_INSTANCE));
        assert_eq!(f.rgb_at(3, 3), DEFAULT_WATER_COLOR);
        assert_eq!(f.timestamp, 2.5);
    }

    #[test]
    fn depth_matches_recast_ray() {
        let scene = flat_scene(WaterMedium::clear(), Some([0.1, -0.05]));
        let accel = build_accel(&scene).unwrap();
        let cam = down_camera(0.8, 24, 18);
        let f = render_frame(&scene, &accel, &cam, 0.0, &RenderOptions::default()).unwrap();
        for j in 0..18 {
            for i in 0..24 {
                let d = f.depth_at(i, j);
                if d.is_finite() {
                    let hit = accel.intersect_exhaustive(&cam.pixel_ray(i, j)).unwrap();
                    assert!((hit.distance - d).abs() <= 1e-6);
                }
            }
        }
    }

    #[test]
    fn zero_turbidity_equals_medium_disabled() {
        let scene = flat_scene(turbidity_to_medium(0.0, DEFAULT_WATER_COLOR).unwrap(), Some([0.0, 0.0]));
        let accel = build_accel(&scene).unwrap();
        let cam = down_camera(0.7, 20, 16);
        let on = render_frame(&scene, &accel, &cam, 0.0, &RenderOptions::default()).unwrap();
        let off = render_frame(&scene, &accel, &cam, 0.0, &RenderOptions { medium_enabled: false, ..Default::default() }).unwrap();
        assert_eq!(on.rgb.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), off.rgb.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }

    #[test]
    fn turbidity_pulls_toward_background() {
        let bg = DEFAULT_WATER_COLOR;
        let dist = |c: [f64; 3]| ((c[0] - bg[0]).powi(2) + (c[1] - bg[1]).powi(2) + (c[2] - bg[2]).powi(2)).sqrt();
        let cam = down_camera(1.5, 9, 9);
        let mut last = f64::INFINITY;
        for t in [0.0, 1.0, 3.0] {
            let scene = flat_scene(turbidity_to_medium(t, bg).unwrap(), None);
            let accel = build_accel(&scene).unwrap();
            let f = render_frame(&scene, &accel, &cam, 0.0, &RenderOptions::default()).unwrap();
            let d = dist(f.rgb_at(4, 4));
            assert!(d < last, "turbidity {t}");
            last = d;
        }
    }

    #[test]
    fn deterministic_across_thread_counts() {
        let scene = flat_scene(turbidity_to_medium(1.0, DEFAULT_WATER_COLOR).unwrap(), Some([0.05, 0.0]));
        let accel = build_accel(&scene).unwrap();
        let cam = down_camera(0.5, 31, 17);
        let opts = RenderOptions { supersample: 2, ..Default::default() };
        let run = |threads| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| render_frame(&scene, &accel, &cam, 0.0, &opts).unwrap())
        };
        assert_eq!(run(1), run(3));
    }

    #[test]
    fn images_encode_at_frame_size() {
        let scene = flat_scene(WaterMedium::clear(), None);
        let accel = build_accel(&scene).unwrap();
        let f = render_frame(&scene, &accel, &down_camera(1.0, 5, 4), 0.0, &RenderOptions::default()).unwrap();
        let (w, h, px) = netpbm::decode_ppm(&f.to_ppm().unwrap()).unwrap();
        assert_eq!((w, h, px.len()), (5, 4, 60));
        let (_, _, d) = netpbm::decode_pfm(&f.depth_pfm().unwrap()).unwrap();
        assert!((d[f.index(2, 2)] as f64 - f.depth_at(2, 2)).abs() < 1e-6);
        let (_, _, ids) = netpbm::decode_pgm16(&f.instance_pgm().unwrap()).unwrap();
        assert_eq!(ids, f.instance);
    }

    #[test]
    fn trace_rejects_non_unit_rays() {
        let scene = flat_scene(WaterMedium::clear(), None);
        let accel = build_accel(&scene).unwrap();
        let bad = Ray { origin: Point3::new(0.0, 0.0, 1.0), dir: Vector3::new(0.0, 0.0, -3.0) };
        assert!(trace_primary(&bad, &accel).is_err());
    }
}
