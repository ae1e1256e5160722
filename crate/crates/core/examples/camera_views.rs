//! Renders all four ROV cameras at one pose: RGB, depth and instance mask.
//!
//! cargo run --example camera_views -- [out_dir]

use std::path::PathBuf;

use nalgebra::{Isometry3, Translation3};
use reefsim::config::RunConfig;
use reefsim::render::{build_accel, mount_cameras, render_frame, CameraRig, MISS_INSTANCE};
use reefsim::trajectory::yaw_pitch;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("reefsim-views"));
    std::fs::create_dir_all(&out)?;

    let cfg = RunConfig::with_seed(7);
    let scene = cfg.build_scene()?;
    let accel = build_accel(&scene)?;

    // 1.2 m up, nosed down 25 degrees.
    let rov = Isometry3::from_parts(Translation3::new(-1.0, 0.5, 1.2), yaw_pitch(0.3, 25f64.to_radians()));
    let rig = CameraRig {
        width: 320,
        height: 240,
        ..cfg.cameras.rig
    };
    for cam in mount_cameras(&rov, &rig)? {
        let f = render_frame(&scene, &accel, &cam, 0.0, &cfg.cameras.render)?;
        let name = cam.role.name();
        std::fs::write(out.join(format!("{name}.ppm")), f.to_ppm()?)?;
        std::fs::write(out.join(format!("{name}_depth.pfm")), f.depth_pfm()?)?;
        std::fs::write(out.join(format!("{name}_mask.pgm")), f.instance_pgm()?)?;

        let hits: Vec<f64> = f.depth.iter().copied().filter(|d| d.is_finite()).collect();
        let mut ids: Vec<u16> = f.instance.iter().copied().filter(|&i| i != MISS_INSTANCE && i != 0).collect();
        ids.sort_unstable();
        ids.dedup();
        let (ci, cj) = cam.center_pixel();
        println!(
            "{name:>12}: centre depth {:.3} m, {:.0}% pixels hit, {} objects visible",
            f.depth_at(ci, cj),
            100.0 * hits.len() as f64 / f.depth.len() as f64,
            ids.len()
        );
    }
    println!("images in {}", out.display());
    Ok(())
}
