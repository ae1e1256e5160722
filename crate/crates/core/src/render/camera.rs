use nalgebra::{Isometry3, Matrix3, Point3, Rotation3, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::{Ray, RenderError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CameraRole {
    ThirdPerson,
    DownFacing,
    FrontFacing,
    FrontDepth,
}

impl CameraRole {
    pub const ALL: [CameraRole; 4] = [
        CameraRole::ThirdPerson,
        CameraRole::DownFacing,
        CameraRole::FrontFacing,
        CameraRole::FrontDepth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CameraRole::ThirdPerson => "third_person",
            CameraRole::DownFacing => "down_facing",
            CameraRole::FrontFacing => "front_facing",
            CameraRole::FrontDepth => "front_depth",
        }
    }
}

/// Pinhole camera. The camera frame is x right, y down, z along the optical
/// axis; `pose` maps camera coordinates to world coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CameraModel {
    pub role: CameraRole,
    pub pose: Isometry3<f64>,
    pub fov_deg: f64,
    pub width: usize,
    pub height: usize,
}

impl CameraModel {
    pub fn new(role: CameraRole, pose: Isometry3<f64>, fov_deg: f64, width: usize, height: usize) -> Result<Self, RenderError> {
        let cam = Self {
            role,
            pose,
            fov_deg,
            width,
            height,
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<(), RenderError> {
        if !(self.fov_deg > 0.0 && self.fov_deg < 180.0) {
            return Err(RenderError::InvalidCamera(format!("fov_deg {} outside (0, 180)", self.fov_deg)));
        }
        if self.width == 0 || self.height == 0 {
            return Err(RenderError::InvalidCamera("image size must be at least 1x1".into()));
        }
        if (self.pose.rotation.norm() - 1.0).abs() > 1e-9 || self.pose.translation.vector.iter().any(|c| !c.is_finite()) {
            return Err(RenderError::InvalidCamera("pose is not a rigid transform".into()));
        }
        Ok(())
    }

    /// Focal length in pixels.
    pub fn focal_px(&self) -> f64 {
        0.5 * self.width as f64 / (0.5 * self.fov_deg.to_radians()).tan()
    }

    /// Principal point, placed at the centre of pixel `center_pixel()`.
    pub fn principal_point(&self) -> (f64, f64) {
        let (i, j) = self.center_pixel();
        (i as f64 + 0.5, j as f64 + 0.5)
    }

    /// The pixel whose centre lies on the optical axis.
    pub fn center_pixel(&self) -> (usize, usize) {
        (self.width / 2, self.height / 2)
    }

    pub fn optical_axis(&self) -> Vector3<f64> {
        self.pose.rotation * Vector3::z()
    }

    pub fn position(&self) -> Point3<f64> {
        Point3::from(self.pose.translation.vector)
    }

    /// Camera-frame direction through the sub-pixel position (px, py).
    pub fn direction_at(&self, px: f64, py: f64) -> Vector3<f64> {
        let f = self.focal_px();
        let (cx, cy) = self.principal_point();
        let d = Vector3::new((px - cx) / f, (py - cy) / f, 1.0);
        self.pose.rotation * d.normalize()
    }

    /// World ray through the centre of pixel (i, j).
    pub fn pixel_ray(&self, i: usize, j: usize) -> Ray {
        self.subpixel_ray(i as f64 + 0.5, j as f64 + 0.5)
    }

    pub fn subpixel_ray(&self, px: f64, py: f64) -> Ray {
        let d = self.direction_at(px, py);
        Ray {
            origin: self.position(),
            dir: d / d.norm(),
        }
    }

    /// Projects a world point to pixel coordinates; None behind the camera.
    pub fn project(&self, p: &Point3<f64>) -> Option<(f64, f64)> {
        let c = self.pose.inverse_transform_point(p);
        if c.z <= 0.0 {
            return None;
        }
        let f = self.focal_px();
        let (cx, cy) = self.principal_point();
        Some((cx + f * c.x / c.z, cy + f * c.y / c.z))
    }
}

/// Camera-to-world rotation whose optical axis is `forward` and image
/// x axis is `forward × up`.
pub fn look_rotation(forward: Vector3<f64>, up: Vector3<f64>) -> Option<UnitQuaternion<f64>> {
    let z = forward.try_normalize(1e-12)?;
    let x = z.cross(&up).try_normalize(1e-9)?;
    let y = z.cross(&x);
    Some(UnitQuaternion::from_rotation_matrix(&Rotation3::from_matrix_unchecked(
        Matrix3::from_columns(&[x, y, z]),
    )))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CameraRig {
    pub width: usize,
    pub height: usize,
    pub fov_deg: f64,
    /// Body-frame (x forward, y left, z up) mount positions, meters.
    pub down_offset: [f64; 3],
    pub front_offset: [f64; 3],
    pub third_person_offset: [f64; 3],
}

impl Default for CameraRig {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            fov_deg: 90.0,
            down_offset: [0.0, 0.0, -0.05],
            front_offset: [0.1, 0.0, 0.0],
            third_person_offset: [-1.5, 0.0, 1.0],
        }
    }
}

impl CameraRig {
    pub fn validate(&self) -> Result<(), RenderError> {
        CameraModel::new(CameraRole::FrontFacing, Isometry3::identity(), self.fov_deg, self.width, self.height)?;
        let finite = |v: &[f64; 3]| v.iter().all(|c| c.is_finite());
        if !(finite(&self.down_offset) && finite(&self.front_offset) && finite(&self.third_person_offset)) {
            return Err(RenderError::InvalidCamera("mount offsets must be finite".into()));
        }
        if Vector3::from(self.third_person_offset).norm() < 1e-6 {
            return Err(RenderError::InvalidCamera("third-person camera cannot sit on the ROV".into()));
        }
        Ok(())
    }
}

/// Body-frame rotation for the down camera: optical axis −z, image top forward.
fn down_mount() -> UnitQuaternion<f64> {
    look_rotation(-Vector3::z(), Vector3::x()).expect("fixed axes")
}

/// Body-frame rotation for the front cameras: optical axis +x, image up +z.
fn front_mount() -> UnitQuaternion<f64> {
    look_rotation(Vector3::x(), Vector3::z()).expect("fixed axes")
}

/// The four rigidly mounted cameras for an ROV at `rov_pose` (body to world).
/// Order: third person, down facing, front facing, front depth.
pub fn mount_cameras(rov_pose: &Isometry3<f64>, rig: &CameraRig) -> Result<Vec<CameraModel>, RenderError> {
    rig.validate()?;
    let mount = |offset: [f64; 3], rot: UnitQuaternion<f64>| {
        rov_pose * Isometry3::from_parts(Translation3::from(Vector3::from(offset)), rot)
    };
    let front = mount(rig.front_offset, front_mount());
    let down = mount(rig.down_offset, down_mount());

    let eye = rov_pose * Point3::from(rig.third_person_offset);
    let target = Point3::from(rov_pose.translation.vector);
    let forward = target - eye;
    let rot = look_rotation(forward, Vector3::z())
        .or_else(|| look_rotation(forward, rov_pose.rotation * Vector3::x()))
        .ok_or_else(|| RenderError::InvalidCamera("third-person camera has no view direction".into()))?;
    let third = Isometry3::from_parts(Translation3::from(eye.coords), rot);

    let cam = |role, pose| CameraModel::new(role, pose, rig.fov_deg, rig.width, rig.height);
    Ok(vec![
        cam(CameraRole::ThirdPerson, third)?,
        cam(CameraRole::DownFacing, down)?,
        cam(CameraRole::FrontFacing, front)?,
        cam(CameraRole::FrontDepth, front)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn rig() -> CameraRig {
        CameraRig::default()
    }

    fn close(a: Vector3<f64>, b: Vector3<f64>) -> bool {
        (a - b).norm() < 1e-12
    }

    #[test]
    fn identity_pose_axes() {
        let cams = mount_cameras(&Isometry3::identity(), &rig()).unwrap();
        assert_eq!(cams[1].role, CameraRole::DownFacing);
        assert!(close(cams[1].optical_axis(), -Vector3::z()));
        assert!(close(cams[2].optical_axis(), Vector3::x()));
        // Image "down" is world −z for the front camera.
        assert!(close(cams[2].pose.rotation * Vector3::y(), -Vector3::z()));
        let tp = &cams[0];
        let to_rov = (Point3::origin() - tp.position()).normalize();
        assert!(close(tp.optical_axis(), to_rov));
    }

    #[test]
    fn yaw_rotates_front_but_not_down_axis() {
        let pose = Isometry3::from_parts(
            Translation3::new(1.0, 2.0, -3.0),
            UnitQuaternion::from_axis_angle(&Vector3::z_axis(), FRAC_PI_2),
        );
        let cams = mount_cameras(&pose, &rig()).unwrap();
        assert!(close(cams[2].optical_axis(), Vector3::y()));
        assert!(close(cams[1].optical_axis(), -Vector3::z()));
        assert!((cams[2].position() - Point3::new(1.0, 2.1, -3.0)).norm() < 1e-12);
    }

    #[test]
    fn front_rgb_and_depth_are_colocated() {
        let pose = Isometry3::from_parts(
            Translation3::new(0.3, -0.2, 1.0),
            UnitQuaternion::from_euler_angles(0.0, 0.2, 1.1),
        );
        let cams = mount_cameras(&pose, &rig()).unwrap();
        assert_eq!(cams[2].pose, cams[3].pose);
    }

    #[test]
    fn center_pixel_ray_is_optical_axis() {
        for (w, h) in [(640, 480), (7, 5), (1, 1)] {
            let cam = CameraModel::new(CameraRole::FrontDepth, Isometry3::identity(), 70.0, w, h).unwrap();
            let (i, j) = cam.center_pixel();
            assert_eq!(cam.pixel_ray(i, j).dir, Vector3::z());
        }
    }

    #[test]
    fn projection_inverts_pixel_rays() {
        let cam = CameraModel::new(CameraRole::FrontFacing, Isometry3::identity(), 90.0, 640, 480).unwrap();
        assert!((cam.focal_px() - 320.0).abs() < 1e-12);
        let r = cam.pixel_ray(10, 400);
        let (u, v) = cam.project(&r.at(3.0)).unwrap();
        assert!((u - 10.5).abs() < 1e-9 && (v - 400.5).abs() < 1e-9);
    }

    #[test]
    fn invalid_cameras_rejected() {
        assert!(CameraModel::new(CameraRole::DownFacing, Isometry3::identity(), 180.0, 10, 10).is_err());
        assert!(CameraModel::new(CameraRole::DownFacing, Isometry3::identity(), 60.0, 0, 10).is_err());
    }
}
