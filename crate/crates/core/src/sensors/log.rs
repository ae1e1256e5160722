use std::io::{self, BufRead, Write};

use nalgebra::Vector3;

use super::{ImuSample, SonarReturn};

pub const IMU_CSV_HEADER: &str = "t,ax,ay,az,wx,wy,wz";
pub const SONAR_CSV_HEADER: &str = "t,azimuth,elevation,range,tof,intensity,class_id,instance_id,valid";

/// Timestamps with 9 decimals, values in shortest round-trip form.
pub fn write_imu_csv<W: Write>(mut w: W, samples: &[ImuSample]) -> io::Result<()> {
    writeln!(w, "{IMU_CSV_HEADER}")?;
    for s in samples {
        writeln!(
            w,
            "{:.9},{},{},{},{},{},{}",
            s.t, s.accel.x, s.accel.y, s.accel.z, s.gyro.x, s.gyro.y, s.gyro.z
        )?;
    }
    Ok(())
}

pub fn read_imu_csv<R: BufRead>(r: R) -> io::Result<Vec<ImuSample>> {
    let bad = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
    let mut lines = r.lines();
    match lines.next() {
        Some(Ok(h)) if h == IMU_CSV_HEADER => {}
        _ => return Err(bad("missing imu csv header".into())),
    }
    let mut out = Vec::new();
    for (n, line) in lines.enumerate() {
        let line = line?;
        let v: Vec<f64> = line
            .split(',')
            .map(|f| f.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| bad(format!("line {}: {e}", n + 2)))?;
        if v.len() != 7 {
            return Err(bad(format!("line {}: expected 7 fields", n + 2)));
        }
        out.push(ImuSample {
            t: v[0],
            accel: Vector3::new(v[1], v[2], v[3]),
            gyro: Vector3::new(v[4], v[5], v[6]),
        });
    }
    Ok(out)
}

pub fn write_sonar_csv<W: Write>(mut w: W, returns: &[SonarReturn]) -> io::Result<()> {
    writeln!(w, "{SONAR_CSV_HEADER}")?;
    for r in returns {
        writeln!(
            w,
            "{:.9},{},{},{},{},{},{},{},{}",
            r.t,
            r.beam_azimuth_rad,
            r.beam_elevation_rad,
            r.range_m,
            r.time_of_flight_s,
            r.intensity,
            r.class_id,
            r.instance_id,
            u8::from(r.valid)
        )?;
    }
    Ok(())
}

/// ASCII PLY of valid returns with per-point labels.
pub fn write_sonar_ply<W: Write>(mut w: W, returns: &[SonarReturn]) -> io::Result<()> {
    let valid: Vec<&SonarReturn> = returns.iter().filter(|r| r.valid).collect();
    write!(
        w,
        "ply\nformat ascii 1.0\nelement vertex {}\nproperty double x\nproperty double y\nproperty double z\n\
         property double intensity\nproperty uchar class_id\nproperty uint instance_id\nend_header\n",
        valid.len()
    )?;
    for r in valid {
        writeln!(w, "{} {} {} {} {} {}", r.point.x, r.point.y, r.point.z, r.intensity, r.class_id, r.instance_id)?;
    }
    Ok(())
}
