use nalgebra::{Point2, Point3};

use super::layers::LayerProfile;
use super::mesh::TriangleMesh;
use super::ShellError;

enum Ring {
    Apex(u32),
    Loop(Vec<u32>),
}

/// Segment `p0–p1` properly crosses or overlaps `q0–q1`.
fn segments_intersect(p0: Point2<f64>, p1: Point2<f64>, q0: Point2<f64>, q1: Point2<f64>) -> bool {
    let orient = |a: Point2<f64>, b: Point2<f64>, c: Point2<f64>| {
        (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
    };
    let on_seg = |a: Point2<f64>, b: Point2<f64>, c: Point2<f64>| {
        c.x >= a.x.min(b.x) && c.x <= a.x.max(b.x) && c.y >= a.y.min(b.y) && c.y <= a.y.max(b.y)
    };
    let d1 = orient(q0, q1, p0);
    let d2 = orient(q0, q1, p1);
    let d3 = orient(p0, p1, q0);
    let d4 = orient(p0, p1, q1);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    (d1 == 0.0 && on_seg(q0, q1, p0))
        || (d2 == 0.0 && on_seg(q0, q1, p1))
        || (d3 == 0.0 && on_seg(p0, p1, q0))
        || (d4 == 0.0 && on_seg(p0, p1, q1))
}

/// True when the closed polygon has no two non-adjacent edges touching.
pub fn is_simple_polygon(poly: &[Point2<f64>]) -> bool {
    let n = poly.len();
    if n < 3 {
        return false;
    }
    for i in 0..n {
        let (a0, a1) = (poly[i], poly[(i + 1) % n]);
        if a0 == a1 {
            return false;
        }
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (b0, b1) = (poly[j], poly[(j + 1) % n]);
            if segments_intersect(a0, a1, b0, b1) {
                return false;
            }
        }
    }
    true
}

/// Lofts a watertight mesh through the layer stack.
///
/// Collapsed layers become single apex vertices; a non-collapsed bottom or
/// top layer is closed with a fan around its centroid. Neighbouring rings are
/// stitched with quads split into two triangles. The result is oriented so
/// its signed volume is positive.
pub fn extrude_shell(layers: &[LayerProfile], samples_per_layer: usize) -> Result<TriangleMesh, ShellError> {
    if layers.len() < 2 {
        return Err(ShellError::InvalidSpec("extrusion needs at least 2 layers".into()));
    }
    if samples_per_layer < 8 {
        return Err(ShellError::InvalidSpec("samples_per_layer must be at least 8".into()));
    }
    if layers.windows(2).any(|w| !(w[0].height_z < w[1].height_z)) {
        return Err(ShellError::InvalidSpec("layer heights must be strictly increasing".into()));
    }

    let n = samples_per_layer;
    let last = layers.len() - 1;
    let z_min = layers[0].height_z;
    let z_span = layers[last].height_z - z_min;
    let mut vertices: Vec<Point3<f64>> = Vec::new();
    let mut uv: Vec<[f64; 2]> = Vec::new();
    let mut rings = Vec::with_capacity(layers.len());

    for (k, layer) in layers.iter().enumerate() {
        let v = (layer.height_z - z_min) / z_span;
        if layer.is_degenerate() {
            if k != 0 && k != last {
                return Err(ShellError::Geometry {
                    layer: k,
                    reason: "interior layer collapsed to a point".into(),
                });
            }
            let p = layer.left_curve.start();
            vertices.push(Point3::new(p.x, p.y, layer.height_z));
            uv.push([0.5, v]);
            rings.push(Ring::Apex((vertices.len() - 1) as u32));
            continue;
        }
        let contour = layer.contour(n);
        if !is_simple_polygon(&contour) {
            return Err(ShellError::Geometry {
                layer: k,
                reason: "contour self-intersects".into(),
            });
        }
        let start = vertices.len() as u32;
        for (i, p) in contour.iter().enumerate() {
            vertices.push(Point3::new(p.x, p.y, layer.height_z));
            uv.push([i as f64 / n as f64, v]);
        }
        rings.push(Ring::Loop((start..start + n as u32).collect()));
    }

    if rings.iter().all(|r| matches!(r, Ring::Apex(_))) {
        return Err(ShellError::Geometry {
            layer: 0,
            reason: "every layer is collapsed".into(),
        });
    }

    let mut tris: Vec<[u32; 3]> = Vec::new();

    // End caps for non-collapsed end layers.
    let mut add_cap = |ring: &[u32], top: bool, vertices: &mut Vec<Point3<f64>>, uv: &mut Vec<[f64; 2]>| {
        let c = ring
            .iter()
            .fold(nalgebra::Vector3::zeros(), |acc, &i| acc + vertices[i as usize].coords)
            / ring.len() as f64;
        vertices.push(Point3::from(c));
        uv.push([0.5, if top { 1.0 } else { 0.0 }]);
        let ci = (vertices.len() - 1) as u32;
        for i in 0..ring.len() {
            let (a, b) = (ring[i], ring[(i + 1) % ring.len()]);
            tris.push(if top { [ci, a, b] } else { [ci, b, a] });
        }
    };
    if let Ring::Loop(r) = &rings[0] {
        add_cap(r, false, &mut vertices, &mut uv);
    }
    if let Ring::Loop(r) = &rings[last] {
        add_cap(r, true, &mut vertices, &mut uv);
    }

    for k in 0..last {
        match (&rings[k], &rings[k + 1]) {
            (Ring::Loop(lo), Ring::Loop(hi)) => {
                for i in 0..n {
                    let j = (i + 1) % n;
                    tris.push([lo[i], lo[j], hi[j]]);
                    tris.push([lo[i], hi[j], hi[i]]);
                }
            }
            (Ring::Apex(a), Ring::Loop(hi)) => {
                for i in 0..n {
                    tris.push([*a, hi[(i + 1) % n], hi[i]]);
                }
            }
            (Ring::Loop(lo), Ring::Apex(a)) => {
                for i in 0..n {
                    tris.push([lo[i], lo[(i + 1) % n], *a]);
                }
            }
            (Ring::Apex(_), Ring::Apex(_)) => {
                return Err(ShellError::Geometry {
                    layer: k + 1,
                    reason: "adjacent collapsed layers".into(),
                });
            }
        }
    }

    let mut mesh = TriangleMesh::new(vertices, tris);
    mesh.uv = uv;
    mesh.class_id = 1;
    if mesh.signed_volume() < 0.0 {
        mesh.flip_winding();
    }
    Ok(mesh)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shellgen::layers::{generate_layers, OysterShellSpec};
    use crate::shellgen::mesh::validate_mesh;

    #[test]
    fn cylinder_volume_matches_analytic() {
        let layers = vec![
            LayerProfile::ellipse(Point2::origin(), 1.0, 1.0, 0.0).unwrap(),
            LayerProfile::ellipse(Point2::origin(), 1.0, 1.0, 1.0).unwrap(),
        ];
        let mesh = extrude_shell(&layers, 64).unwrap();
        let r = validate_mesh(&mesh);
        assert!(r.watertight && r.consistent_winding);
        assert_eq!(r.euler_characteristic, 2);
        let exact = std::f64::consts::PI;
        assert!(((r.signed_volume - exact) / exact).abs() < 0.02, "{}", r.signed_volume);
    }

    #[test]
    fn shell_is_closed_with_outward_normals() {
        let layers = generate_layers(&OysterShellSpec::with_seed(11)).unwrap();
        let mesh = extrude_shell(&layers, 32).unwrap();
        let r = validate_mesh(&mesh);
        assert!(r.watertight, "{:?}", r.boundary_edges);
        assert!(r.consistent_winding);
        assert_eq!(r.euler_characteristic, 2);
        assert!(r.signed_volume > 0.0);
        assert_eq!(r.degenerate_triangles, 0);
        // Normals point away from the shell's vertical axis at mid height.
        let mid = layers[layers.len() / 2].height_z;
        for (v, nrm) in mesh.vertices.iter().zip(&mesh.normals) {
            if (v.z - mid).abs() < 1e-12 {
                assert!(nrm.x * v.x + nrm.y * v.y > 0.0);
            }
        }
        assert!(mesh.uv.iter().all(|t| (0.0..=1.0).contains(&t[0]) && (0.0..=1.0).contains(&t[1])));
    }

    #[test]
    fn self_intersecting_layer_is_named() {
        let good = LayerProfile::ellipse(Point2::origin(), 1.0, 0.5, 0.0).unwrap();
        // Push the upper half below the lower half: a bow-tie contour.
        let bad_left = good
            .left_curve
            .map_control_points(|i, p| if i == 0 || i == 9 { p } else { Point2::new(p.x, -1.5 * p.y) });
        let bad_right = good
            .right_curve
            .map_control_points(|i, p| if i == 0 || i == 9 { p } else { Point2::new(-p.x, p.y) });
        let bad = LayerProfile::new(bad_left, bad_right, 1.0).unwrap();
        let top = LayerProfile::point(Point2::origin(), 2.0);
        let err = extrude_shell(&[good, bad, top], 32).unwrap_err();
        assert!(matches!(err, ShellError::Geometry { layer: 1, .. }), "{err}");
    }

    #[test]
    fn rejects_bad_inputs() {
        let a = LayerProfile::ellipse(Point2::origin(), 1.0, 1.0, 0.0).unwrap();
        let b = LayerProfile::ellipse(Point2::origin(), 1.0, 1.0, 1.0).unwrap();
        assert!(extrude_shell(&[a.clone()], 16).is_err());
        assert!(extrude_shell(&[a.clone(), b.clone()], 7).is_err());
        assert!(extrude_shell(&[b, a], 16).is_err());
    }

    #[test]
    fn simple_polygon_check() {
        let square = [
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ];
        assert!(is_simple_polygon(&square));
        let bowtie = [square[0], square[2], square[1], square[3]];
        assert!(!is_simple_polygon(&bowtie));
    }
}
