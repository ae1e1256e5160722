//! Renders one view at several turbidities. Colours fade toward the water
//! colour as turbidity rises; turbidity 0 matches a render with no medium.
//!
//! cargo run --example turbidity_sweep -- [out_dir]

use std::path::PathBuf;

use nalgebra::{Isometry3, Translation3};
use reefsim::config::RunConfig;
use reefsim::render::{build_accel, mount_cameras, render_frame, CameraRig, CameraRole, RenderOptions};
use reefsim::trajectory::yaw_pitch;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("reefsim-turbidity"));
    std::fs::create_dir_all(&out)?;

    let cfg = RunConfig::with_seed(7);
    let rov = Isometry3::from_parts(Translation3::new(-2.0, 0.0, 1.0), yaw_pitch(0.0, 0.35));
    let rig = CameraRig {
        width: 240,
        height: 180,
        ..cfg.cameras.rig
    };
    let cam = mount_cameras(&rov, &rig)?
        .into_iter()
        .find(|c| c.role == CameraRole::FrontFacing)
        .expect("rig has a front camera");

    let mut baseline = None;
    for turbidity in [0.0, 0.5, 1.0, 2.0, 3.0, 5.0] {
        let scene = cfg.build_scene_with_turbidity(turbidity)?;
        let accel = build_accel(&scene)?;
        let f = render_frame(&scene, &accel, &cam, 0.0, &RenderOptions::default())?;
        if turbidity == 0.0 {
            let off = RenderOptions {
                medium_enabled: false,
                ..Default::default()
            };
            baseline = Some(render_frame(&scene, &accel, &cam, 0.0, &off)?.rgb == f.rgb);
        }
        let bg = scene.medium.background_rgb;
        let gap: f64 = f.rgb.chunks(3).map(|p| (0..3).map(|c| (p[c] - bg[c]).abs()).sum::<f64>()).sum::<f64>() / (3 * f.width * f.height) as f64;
        println!("turbidity {turbidity:>3}: mean |rgb - water| = {gap:.4}");
        std::fs::write(out.join(format!("turbidity_{turbidity}.ppm")), f.to_ppm()?)?;
    }
    println!("turbidity 0 equals medium off: {}", baseline.unwrap_or(false));
    println!("images in {}", out.display());
    Ok(())
}
