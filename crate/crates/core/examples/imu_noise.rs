//! IMU logs for a lawnmower survey under each noise preset, plus a quick
//! look at how integrated accelerometer noise spreads with time.
//!
//! cargo run --example imu_noise -- [out_dir]

use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

use nalgebra::Point3;
use reefsim::reef::Rect;
use reefsim::sensors::{synth_imu, write_imu_csv, ImuConfig, ImuPreset, ImuSynthesizer, VibrationModel, STANDARD_GRAVITY};
use reefsim::trajectory::{fit_path, lawnmower_pattern, PoseSample};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("reefsim-imu"));
    std::fs::create_dir_all(&out)?;

    let wps = lawnmower_pattern(&Rect::new([-4.0, -2.0], [4.0, 2.0]), 2.0, 1.5)?;
    let traj = fit_path(&wps, 0.5)?;
    println!("survey: {:.1} m in {:.1} s", traj.chord_length(), traj.duration());

    for preset in [ImuPreset::None, ImuPreset::Low, ImuPreset::Medium, ImuPreset::High] {
        let mut cfg = ImuConfig::from_preset(preset, 200.0, 1);
        if preset == ImuPreset::High {
            cfg.accel_vibration = VibrationModel::Sinusoidal {
                amplitude: 0.05,
                freq_hz: 25.0,
                phase: [0.0, 1.0, 2.0],
            };
        }
        let log = synth_imu(&traj, &cfg, STANDARD_GRAVITY)?;
        let name = format!("imu_{preset:?}.csv").to_lowercase();
        write_imu_csv(BufWriter::new(File::create(out.join(&name))?), &log)?;
        let mean_z = log.iter().map(|s| s.accel.z).sum::<f64>() / log.len() as f64;
        println!("{preset:?}: {} samples, mean accel z {mean_z:.4} m/s^2 -> {name}", log.len());
    }

    // Velocity random walk: std of the integrated white noise grows like sqrt(T).
    let rest = PoseSample::at_rest(0.0, Point3::origin(), 0.0);
    let rate = 200.0;
    let horizons = [1.0, 4.0, 16.0];
    let mut sq = [0.0; 3];
    let runs = 200;
    for run in 0..runs {
        let mut cfg = ImuConfig::from_preset(ImuPreset::Medium, rate, 100 + run);
        cfg.accel_bias_init = [0.0; 3];
        cfg.accel_bias_instability = 0.0;
        let mut synth = ImuSynthesizer::new(&cfg, STANDARD_GRAVITY)?;
        let mut v = 0.0;
        let mut h = 0;
        for k in 0..(16.0 * rate) as usize {
            v += synth.measure(&PoseSample { t: k as f64 / rate, ..rest }).accel.x / rate;
            if (k + 1) as f64 == horizons[h] * rate {
                sq[h] += v * v;
                h += 1;
            }
        }
    }
    for (t, s) in horizons.iter().zip(sq) {
        let std = (s / runs as f64).sqrt();
        println!("T = {t:>4} s: velocity error std {std:.5} m/s (ratio to sqrt(T) {:.5})", std / t.sqrt());
    }
    Ok(())
}
