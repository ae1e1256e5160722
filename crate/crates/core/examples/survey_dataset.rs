//! A short lawnmower survey exported as a complete session: images, depth,
//! masks, IMU, sonar, TUM poses, control labels and detection annotations.
//!
//! cargo run --release --example survey_dataset -- [out_dir]

use std::path::PathBuf;

use reefsim::config::RunConfig;
use reefsim::dataset::{export_session_with_progress, SessionManifest};
use reefsim::render::build_accel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("reefsim-survey"));

    let mut cfg = RunConfig::from_json_str(
        r#"{
          "seed": 2024,
          "session_id": "survey",
          "cameras": {"rig": {"width": 320, "height": 240}},
          "schedule": {"duration_s": 20, "frame_rate_hz": 2},
          "medium": {"turbidity": 1.5}
        }"#,
    )?;
    cfg.apply_env()?;
    cfg.validate()?;

    let traj = cfg.build_trajectory()?;
    let scene = cfg.build_scene()?;
    let accel = build_accel(&scene)?;
    let spec = cfg.session_spec(&traj, &cfg.session_id)?;
    let manifest = export_session_with_progress(&scene, &accel, &traj, &spec, &out, &mut |done, total| {
        eprint!("\rframe {done}/{total}");
    })?;
    eprintln!();

    let root = out.join(&manifest.session_id);
    let again = SessionManifest::load(&root)?;
    println!("session {} complete: {}", again.session_id, again.complete);
    println!("{} frames, {} checksummed files", again.frames.len(), again.checksums.len());
    let ann = std::fs::read_to_string(root.join(&again.logs.annotations))?;
    let n_ann = serde_json::from_str::<serde_json::Value>(&ann)?
        .as_array()
        .map(|a| a.iter().map(|f| f["annotations"].as_array().map_or(0, |x| x.len())).sum::<usize>())
        .unwrap_or(0);
    println!("{n_ann} object annotations on the {:?} camera", again.annotation_camera);
    println!("written to {}", root.display());
    Ok(())
}
