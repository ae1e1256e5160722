use std::collections::HashMap;

use nalgebra::{Point3, Vector3};
use rand::Rng;

use super::ClassId;
use crate::rng::seeded_rng;
use crate::shellgen::TriangleMesh;

/// Unit icosphere after `subdivisions` rounds of 4:1 splitting.
pub fn icosphere(subdivisions: u32) -> TriangleMesh {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let mut verts: Vec<Vector3<f64>> = [
        (-1.0, t, 0.0),
        (1.0, t, 0.0),
        (-1.0, -t, 0.0),
        (1.0, -t, 0.0),
        (0.0, -1.0, t),
        (0.0, 1.0, t),
        (0.0, -1.0, -t),
        (0.0, 1.0, -t),
        (t, 0.0, -1.0),
        (t, 0.0, 1.0),
        (-t, 0.0, -1.0),
        (-t, 0.0, 1.0),
    ]
    .iter()
    .map(|&(x, y, z)| Vector3::new(x, y, z).normalize())
    .collect();
    let mut faces: Vec<[u32; 3]> = vec![
        [0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
        [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
        [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
        [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoint: HashMap<(u32, u32), u32> = HashMap::new();
        let mut mid = |a: u32, b: u32, verts: &mut Vec<Vector3<f64>>| {
            let key = (a.min(b), a.max(b));
            *midpoint.entry(key).or_insert_with(|| {
                verts.push(((verts[a as usize] + verts[b as usize]) * 0.5).normalize());
                (verts.len() - 1) as u32
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for [a, b, c] in faces {
            let ab = mid(a, b, &mut verts);
            let bc = mid(b, c, &mut verts);
            let ca = mid(c, a, &mut verts);
            next.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
        }
        faces = next;
    }
    let mut mesh = TriangleMesh::new(verts.into_iter().map(Point3::from).collect(), faces);
    if mesh.signed_volume() < 0.0 {
        mesh.flip_winding();
    }
    mesh
}

/// Rock-like blob: an icosphere whose radius is modulated by random lobes,
/// flattened vertically and shifted so its lowest point sits at z = 0.
pub fn rock_mesh(radius: f64, flatten: f64, roughness: f64, seed: u64, class_id: ClassId) -> TriangleMesh {
    let mut rng = seeded_rng(seed);
    let lobes: Vec<(Vector3<f64>, f64)> = (0..7)
        .map(|_| {
            let d = Vector3::new(
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
            );
            let d = if d.norm() < 1e-6 { Vector3::z() } else { d.normalize() };
            (d, rng.gen_range(-roughness..=roughness))
        })
        .collect();
    let mut mesh = icosphere(2);
    for v in &mut mesh.vertices {
        let dir = v.coords;
        let r = 1.0 + lobes.iter().map(|(d, a)| a * dir.dot(d).max(0.0).powi(2)).sum::<f64>();
        let p = dir * (radius * r.max(0.3));
        *v = Point3::new(p.x, p.y, p.z * flatten);
    }
    let min_z = mesh.vertices.iter().map(|v| v.z).fold(f64::INFINITY, f64::min);
    mesh.translate_z(-min_z);
    mesh.uv = mesh
        .vertices
        .iter()
        .map(|v| {
            let d = v.coords.normalize();
            [0.5 + d.y.atan2(d.x) / std::f64::consts::TAU, 0.5 + 0.5 * d.z.clamp(-1.0, 1.0)]
        })
        .collect();
    mesh.recompute_normals();
    if mesh.signed_volume() < 0.0 {
        mesh.flip_winding();
    }
    mesh.class_id = class_id as u8;
    mesh
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::shellgen::validate_mesh;

    #[test]
    fn icosphere_is_closed() {
        let m = icosphere(2);
        let r = validate_mesh(&m);
        assert_eq!(r.triangle_count, 320);
        assert!(r.watertight && r.consistent_winding);
        assert_eq!(r.euler_characteristic, 2);
        let sphere = 4.0 / 3.0 * std::f64::consts::PI;
        assert!(r.signed_volume > 0.9 * sphere && r.signed_volume < sphere);
    }

    #[test]
    fn rocks_rest_on_zero_and_stay_closed() {
        for seed in 0..10 {
            let m = rock_mesh(0.15, 0.6, 0.3, seed, ClassId::Rock);
            let r = validate_mesh(&m);
            assert!(r.watertight && r.consistent_winding && r.signed_volume > 0.0);
            assert_eq!(r.bounding_box.unwrap().min[2], 0.0);
            assert_eq!(m.class_id, 2);
        }
    }
}
