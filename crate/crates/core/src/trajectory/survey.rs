use nalgebra::Point3;

use super::TrajectoryError;
use crate::reef::Rect;

/// Boustrophedon survey: tracks run along x and step across y. The track
/// count is ⌈height / spacing⌉ + 1 and the tracks are spread evenly from
/// edge to edge, so their separation equals `track_spacing` whenever it
/// divides the region height and is slightly smaller otherwise.
pub fn lawnmower_pattern(region: &Rect, track_spacing: f64, altitude: f64) -> Result<Vec<Point3<f64>>, TrajectoryError> {
    if !region.is_valid() {
        return Err(TrajectoryError::Path("survey region is degenerate".into()));
    }
    if !(track_spacing.is_finite() && track_spacing > 0.0) || !altitude.is_finite() {
        return Err(TrajectoryError::Path("track_spacing must be > 0 and altitude finite".into()));
    }
    let h = region.height();
    let gaps = ((h / track_spacing) - 1e-9).ceil().max(1.0) as usize;
    let step = h / gaps as f64;
    let mut out = Vec::with_capacity(2 * (gaps + 1));
    for k in 0..=gaps {
        let y = if k == gaps { region.max[1] } else { region.min[1] + step * k as f64 };
        let (a, b) = if k % 2 == 0 {
            (region.min[0], region.max[0])
        } else {
            (region.max[0], region.min[0])
        };
        out.push(Point3::new(a, y, altitude));
        out.push(Point3::new(b, y, altitude));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_by_ten_at_two() {
        let r = Rect::new([0.0, 0.0], [10.0, 10.0]);
        let w = lawnmower_pattern(&r, 2.0, -1.5).unwrap();
        assert_eq!(w.len(), 12);
        for k in 0..6 {
            assert!((w[2 * k].y - 2.0 * k as f64).abs() < 1e-12);
            assert_eq!(w[2 * k].y, w[2 * k + 1].y);
        }
        assert!(w.iter().all(|p| r.contains(p.x, p.y) && p.z == -1.5));
    }

    #[test]
    fn wide_spacing_gives_two_edge_tracks() {
        let r = Rect::new([-3.0, -1.0], [3.0, 1.0]);
        for s in [2.0, 5.0, 100.0] {
            let w = lawnmower_pattern(&r, s, 0.0).unwrap();
            assert_eq!(w.len(), 4);
            assert_eq!((w[0].y, w[2].y), (-1.0, 1.0));
        }
    }

    #[test]
    fn uneven_spacing_stays_inside() {
        let r = Rect::new([0.0, 0.0], [4.0, 10.0]);
        let w = lawnmower_pattern(&r, 3.0, 0.0).unwrap();
        assert_eq!(w.len(), 10);
        assert!(w.iter().all(|p| r.contains(p.x, p.y)));
        for k in 1..5 {
            let gap = w[2 * k].y - w[2 * k - 2].y;
            assert!(gap <= 3.0 && (gap - 2.5).abs() < 1e-12);
        }
        // Consecutive waypoints never coincide, so the path can be fitted.
        assert!(w.windows(2).all(|p| p[0] != p[1]));
    }

    #[test]
    fn rejects_bad_input() {
        let r = Rect::new([0.0, 0.0], [1.0, 1.0]);
        assert!(lawnmower_pattern(&r, 0.0, 0.0).is_err());
        assert!(lawnmower_pattern(&Rect::new([0.0, 0.0], [0.0, 1.0]), 1.0, 0.0).is_err());
    }
}
