use std::io::{self, BufRead, Write};

use nalgebra::{Point3, Quaternion, UnitQuaternion};

use super::DatasetError;
use crate::trajectory::PoseSample;

/// `%.9g`: 9 significant digits, trailing zeros dropped, exponent form
/// outside [1e-4, 1e9).
pub fn format_g9(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{x:.8e}");
    let (mant, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let mant = strip_zeros(mant);
        return format!("{mant}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    strip_zeros(&format!("{x:.*}", (8 - exp) as usize)).to_string()
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn tum_line(p: &PoseSample) -> String {
    let q = p.orientation.quaternion();
    let v = [p.position.x, p.position.y, p.position.z, q.i, q.j, q.k, q.w];
    let mut s = format!("{:.9}", p.t);
    for x in v {
        s.push(' ');
        s.push_str(&format_g9(x));
    }
    s
}

/// One line per pose: `timestamp tx ty tz qx qy qz qw`.
pub fn write_tum_poses<W: Write>(mut w: W, samples: &[PoseSample]) -> Result<(), DatasetError> {
    for pair in samples.windows(2) {
        if !(pair[1].t > pair[0].t) {
            return Err(DatasetError::Export(format!(
                "pose timestamps not strictly increasing at t={}",
                pair[1].t
            )));
        }
    }
    for p in samples {
        if !p.t.is_finite() || (p.orientation.norm() - 1.0).abs() > 1e-6 {
            return Err(DatasetError::Export(format!("invalid pose at t={}", p.t)));
        }
        writeln!(w, "{}", tum_line(p)).map_err(|e| DatasetError::io("<tum>", e))?;
    }
    Ok(())
}

/// (t, position, orientation) per non-comment line.
pub fn read_tum_poses<R: BufRead>(r: R) -> io::Result<Vec<(f64, Point3<f64>, UnitQuaternion<f64>)>> {
    let bad = |m: String| io::Error::new(io::ErrorKind::InvalidData, m);
    let mut out = Vec::new();
    for (n, line) in r.lines().enumerate() {
        let line = line?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let v: Vec<f64> = line
            .split(' ')
            .map(str::parse)
            .collect::<Result<_, _>>()
            .map_err(|e| bad(format!("line {}: {e}", n + 1)))?;
        if v.len() != 8 {
            return Err(bad(format!("line {}: expected 8 fields, got {}", n + 1, v.len())));
        }
        let q = Quaternion::new(v[7], v[4], v[5], v[6]);
        out.push((v[0], Point3::new(v[1], v[2], v[3]), UnitQuaternion::new_unchecked(q)));
    }
    Ok(out)
}
