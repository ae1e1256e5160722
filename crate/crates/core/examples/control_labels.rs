//! Control classes in action: scripted pilot commands are stepped through
//! the point-object kinematics, replayed from a record and written as
//! labels, then the 7x7 class grid is printed for a sweep of rates.
//!
//! cargo run --example control_labels

use nalgebra::Point3;
use reefsim::dataset::write_control_labels;
use reefsim::trajectory::{
    quantize_control, step_kinematics, ControlCommand, ControlLimits, MotionSource, PoseSample, RecordedMotion,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let lim = ControlLimits::default();
    let dt = 0.1;

    // Descend while turning right, level out, then turn left.
    let script = [
        (20, ControlCommand::new(0.2, 0.3, 0.4)),
        (20, ControlCommand::new(-0.2, 0.0, 0.4)),
        (20, ControlCommand::new(0.0, -0.45, 0.3)),
    ];
    let mut state = PoseSample::at_rest(0.0, Point3::new(0.0, 0.0, 2.0), 0.0);
    let mut rec = RecordedMotion::new();
    for (n, cmd) in script {
        for _ in 0..n {
            rec.push(state, cmd)?;
            state = step_kinematics(&state, &cmd.clamped(&lim), dt)?;
        }
    }
    rec.set_end(state.t)?;
    let (yaw, pitch) = state.yaw_pitch();
    println!(
        "after {:.1} s: position ({:.2}, {:.2}, {:.2}), yaw {:.1} deg, pitch {:.1} deg",
        state.t,
        state.position.x,
        state.position.y,
        state.position.z,
        yaw.to_degrees(),
        pitch.to_degrees()
    );

    // One label per second from the recording.
    let mut rows = Vec::new();
    for k in 0..6u64 {
        let t = k as f64;
        let cmd = rec.command_at(t)?;
        rows.push((k, quantize_control(&cmd, lim.max_pitch_rate, lim.max_yaw_rate)));
    }
    let mut csv = Vec::new();
    write_control_labels(&mut csv, &rows)?;
    print!("{}", String::from_utf8(csv)?);

    println!("\nclass grid (rows pitch rate, columns yaw rate):");
    let rates: Vec<f64> = (0..7).map(|k| -0.5 + k as f64 / 6.0).collect();
    for &p in rates.iter().rev() {
        let row: Vec<String> = rates
            .iter()
            .map(|&y| {
                let l = quantize_control(&ControlCommand::new(p, y, 0.0), lim.max_pitch_rate, lim.max_yaw_rate);
                format!("{}{}", l.pitch_class, l.yaw_class)
            })
            .collect();
        println!("  {p:+.2}  {}", row.join(" "));
    }
    Ok(())
}
