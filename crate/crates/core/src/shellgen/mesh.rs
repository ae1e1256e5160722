use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Point3, Vector3};
use serde::Serialize;

use super::ShellError;

/// Indexed triangle mesh with per-vertex normals and texture coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub vertices: Vec<Point3<f64>>,
    pub triangles: Vec<[u32; 3]>,
    pub normals: Vec<Vector3<f64>>,
    pub uv: Vec<[f64; 2]>,
    pub class_id: u8,
    pub instance_id: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundingBox {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl BoundingBox {
    pub fn extent(&self) -> [f64; 3] {
        [
            self.max[0] - self.min[0],
            self.max[1] - self.min[1],
            self.max[2] - self.min[2],
        ]
    }
}

impl TriangleMesh {
    pub fn new(vertices: Vec<Point3<f64>>, triangles: Vec<[u32; 3]>) -> Self {
        let n = vertices.len();
        let mut mesh = Self {
            vertices,
            triangles,
            normals: vec![Vector3::zeros(); n],
            uv: vec![[0.0, 0.0]; n],
            class_id: 0,
            instance_id: 0,
        };
        mesh.recompute_normals();
        mesh
    }

    /// Area-weighted vertex normals.
    pub fn recompute_normals(&mut self) {
        let mut acc = vec![Vector3::zeros(); self.vertices.len()];
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| self.vertices[i as usize]);
            let n = (b - a).cross(&(c - a));
            for &i in t {
                acc[i as usize] += n;
            }
        }
        self.normals = acc
            .into_iter()
            .map(|n| {
                let len = n.norm();
                if len > 0.0 {
                    n / len
                } else {
                    Vector3::z()
                }
            })
            .collect();
    }

    pub fn bounding_box(&self) -> Option<BoundingBox> {
        let first = self.vertices.first()?;
        let mut min = [first.x, first.y, first.z];
        let mut max = min;
        for v in &self.vertices {
            for k in 0..3 {
                min[k] = min[k].min(v[k]);
                max[k] = max[k].max(v[k]);
            }
        }
        Some(BoundingBox { min, max })
    }

    /// Divergence-theorem volume; positive for outward winding.
    pub fn signed_volume(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = t.map(|i| self.vertices[i as usize].coords);
                a.dot(&b.cross(&c))
            })
            .sum::<f64>()
            / 6.0
    }

    pub fn flip_winding(&mut self) {
        for t in &mut self.triangles {
            t.swap(1, 2);
        }
        for n in &mut self.normals {
            *n = -*n;
        }
    }

    pub fn translate_z(&mut self, dz: f64) {
        for v in &mut self.vertices {
            v.z += dz;
        }
    }

    pub fn to_obj_string(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# reefsim mesh class_id={} instance_id={}",
            self.class_id, self.instance_id
        );
        for v in &self.vertices {
            let _ = writeln!(s, "v {} {} {}", v.x, v.y, v.z);
        }
        for t in &self.uv {
            let _ = writeln!(s, "vt {} {}", t[0], t[1]);
        }
        for n in &self.normals {
            let _ = writeln!(s, "vn {} {} {}", n.x, n.y, n.z);
        }
        for t in &self.triangles {
            let [a, b, c] = t.map(|i| i + 1);
            let _ = writeln!(s, "f {a}/{a}/{a} {b}/{b}/{b} {c}/{c}/{c}");
        }
        s
    }

    pub fn to_ply_string(&self) -> String {
        let mut s = String::new();
        let _ = write!(
            s,
            "ply\nformat ascii 1.0\ncomment reefsim mesh class_id {} instance_id {}\n\
             element vertex {}\nproperty double x\nproperty double y\nproperty double z\n\
             property double nx\nproperty double ny\nproperty double nz\n\
             property double u\nproperty double v\n\
             element face {}\nproperty list uchar int vertex_indices\nend_header\n",
            self.class_id,
            self.instance_id,
            self.vertices.len(),
            self.triangles.len()
        );
        for ((v, n), t) in self.vertices.iter().zip(&self.normals).zip(&self.uv) {
            let _ = writeln!(
                s,
                "{} {} {} {} {} {} {} {}",
                v.x, v.y, v.z, n.x, n.y, n.z, t[0], t[1]
            );
        }
        for t in &self.triangles {
            let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
        }
        s
    }

    pub fn write_obj(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_obj_string())
    }

    pub fn write_ply(&self, path: &Path) -> std::io::Result<()> {
        std::fs::write(path, self.to_ply_string())
    }

    pub fn read_obj(path: &Path) -> Result<Self, ShellError> {
        let text = std::fs::read_to_string(path).map_err(|e| ShellError::Io {
            path: path.display().to_string(),
            source: e,
        })?;
        parse_obj(&text)
    }
}

/// Parses the `v`/`vt`/`vn`/`f` subset of Wavefront OBJ. Polygons are
/// fan-triangulated. Files whose faces all use matching `i/i/i` indices keep
/// their vertex order.
pub fn parse_obj(text: &str) -> Result<TriangleMesh, ShellError> {
    let mut pos = Vec::new();
    let mut tex = Vec::new();
    let mut nor = Vec::new();
    let mut faces: Vec<Vec<(usize, Option<usize>, Option<usize>)>> = Vec::new();
    let mut class_id = 0u8;
    let mut instance_id = 0u32;

    let err = |line: usize, msg: &str| ShellError::Obj(format!("line {}: {msg}", line + 1));
    let nums = |it: std::str::SplitWhitespace, line: usize, want: usize| -> Result<Vec<f64>, ShellError> {
        let v: Result<Vec<f64>, _> = it.take(want).map(str::parse::<f64>).collect();
        let v = v.map_err(|_| err(line, "bad number"))?;
        if v.len() < want {
            return Err(err(line, "too few components"));
        }
        Ok(v)
    };

    for (ln, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if let Some(rest) = line.strip_prefix("# reefsim mesh") {
            for kv in rest.split_whitespace() {
                if let Some(v) = kv.strip_prefix("class_id=") {
                    class_id = v.parse().unwrap_or(0);
                } else if let Some(v) = kv.strip_prefix("instance_id=") {
                    instance_id = v.parse().unwrap_or(0);
                }
            }
            continue;
        }
        let mut it = line.split_whitespace();
        match it.next() {
            Some("v") => {
                let v = nums(it, ln, 3)?;
                pos.push(Point3::new(v[0], v[1], v[2]));
            }
            Some("vt") => {
                let v = nums(it, ln, 2)?;
                tex.push([v[0], v[1]]);
            }
            Some("vn") => {
                let v = nums(it, ln, 3)?;
                nor.push(Vector3::new(v[0], v[1], v[2]));
            }
            Some("f") => {
                let resolve = |s: &str, len: usize| -> Result<Option<usize>, ShellError> {
                    if s.is_empty() {
                        return Ok(None);
                    }
                    let i: i64 = s.parse().map_err(|_| err(ln, "bad face index"))?;
                    let idx = if i > 0 { i - 1 } else { len as i64 + i };
                    if idx < 0 || idx as usize >= len {
                        return Err(err(ln, "face index out of range"));
                    }
                    Ok(Some(idx as usize))
                };
                let mut corners = Vec::new();
                for c in it {
                    let mut parts = c.split('/');
                    let v = resolve(parts.next().unwrap_or(""), pos.len())?
                        .ok_or_else(|| err(ln, "missing vertex index"))?;
                    let t = resolve(parts.next().unwrap_or(""), tex.len())?;
                    let n = resolve(parts.next().unwrap_or(""), nor.len())?;
                    corners.push((v, t, n));
                }
                if corners.len() < 3 {
                    return Err(err(ln, "face with fewer than 3 vertices"));
                }
                faces.push(corners);
            }
            _ => {}
        }
    }

    let aligned = tex.len() == pos.len()
        && nor.len() == pos.len()
        && faces
            .iter()
            .flatten()
            .all(|&(v, t, n)| t == Some(v) && n == Some(v));

    let mut mesh = if aligned {
        let mut triangles = Vec::new();
        for f in &faces {
            for k in 1..f.len() - 1 {
                triangles.push([f[0].0 as u32, f[k].0 as u32, f[k + 1].0 as u32]);
            }
        }
        TriangleMesh {
            vertices: pos,
            triangles,
            normals: nor,
            uv: tex,
            class_id,
            instance_id,
        }
    } else {
        let mut map: HashMap<(usize, Option<usize>, Option<usize>), u32> = HashMap::new();
        let mut vertices = Vec::new();
        let mut uv = Vec::new();
        let mut normals = Vec::new();
        let mut has_all_normals = true;
        let mut triangles = Vec::new();
        for f in &faces {
            let ids: Vec<u32> = f
                .iter()
                .map(|&key| {
                    *map.entry(key).or_insert_with(|| {
                        vertices.push(pos[key.0]);
                        uv.push(key.1.map(|t| tex[t]).unwrap_or([0.0, 0.0]));
                        match key.2 {
                            Some(n) => normals.push(nor[n]),
                            None => {
                                has_all_normals = false;
                                normals.push(Vector3::z());
                            }
                        }
                        (vertices.len() - 1) as u32
                    })
                })
                .collect();
            for k in 1..ids.len() - 1 {
                triangles.push([ids[0], ids[k], ids[k + 1]]);
            }
        }
        let mut m = TriangleMesh {
            vertices,
            triangles,
            normals,
            uv,
            class_id,
            instance_id,
        };
        if !has_all_normals {
            m.recompute_normals();
        }
        m
    };
    if mesh.triangles.is_empty() {
        return Err(ShellError::Obj("no faces".into()));
    }
    mesh.uv.iter_mut().for_each(|t| {
        t[0] = t[0].clamp(0.0, 1.0);
        t[1] = t[1].clamp(0.0, 1.0);
    });
    Ok(mesh)
}

/// Structural checks on a mesh. Problems are reported, never raised.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshReport {
    pub vertex_count: usize,
    pub triangle_count: usize,
    pub edge_count: usize,
    pub out_of_range_indices: usize,
    pub degenerate_triangles: usize,
    /// Undirected edges used by exactly one triangle.
    pub boundary_edges: Vec<[u32; 2]>,
    /// Undirected edges used by more than two triangles.
    pub non_manifold_edges: usize,
    pub watertight: bool,
    pub consistent_winding: bool,
    pub euler_characteristic: i64,
    pub signed_volume: f64,
    pub bounding_box: Option<BoundingBox>,
}

pub fn validate_mesh(mesh: &TriangleMesh) -> MeshReport {
    let nv = mesh.vertices.len();
    let mut out_of_range = 0;
    let mut degenerate = 0;
    let mut undirected: HashMap<[u32; 2], usize> = HashMap::new();
    let mut directed: HashMap<[u32; 2], usize> = HashMap::new();
    let mut valid_tris = Vec::with_capacity(mesh.triangles.len());

    for t in &mesh.triangles {
        if t.iter().any(|&i| i as usize >= nv) {
            out_of_range += 1;
            continue;
        }
        valid_tris.push(*t);
        let [a, b, c] = t.map(|i| mesh.vertices[i as usize]);
        let area2 = (b - a).cross(&(c - a)).norm();
        let scale = (b - a).norm().max((c - a).norm()).max((c - b).norm());
        if t[0] == t[1] || t[1] == t[2] || t[0] == t[2] || area2 <= 1e-14 * scale * scale {
            degenerate += 1;
        }
        for k in 0..3 {
            let (u, v) = (t[k], t[(k + 1) % 3]);
            *directed.entry([u, v]).or_default() += 1;
            *undirected.entry([u.min(v), u.max(v)]).or_default() += 1;
        }
    }

    let mut boundary: Vec<[u32; 2]> = undirected
        .iter()
        .filter(|(_, &c)| c == 1)
        .map(|(e, _)| *e)
        .collect();
    boundary.sort_unstable();
    let non_manifold = undirected.values().filter(|&&c| c > 2).count();
    let watertight = out_of_range == 0
        && !mesh.triangles.is_empty()
        && undirected.values().all(|&c| c == 2);
    let consistent = directed
        .iter()
        .all(|(&[u, v], &c)| c == 1 && directed.get(&[v, u]).copied().unwrap_or(0) <= 1);

    let edge_count = undirected.len();
    let signed_volume = if out_of_range == 0 {
        mesh.signed_volume()
    } else {
        TriangleMesh {
            triangles: valid_tris,
            ..mesh.clone()
        }
        .signed_volume()
    };

    MeshReport {
        vertex_count: nv,
        triangle_count: mesh.triangles.len(),
        edge_count,
        out_of_range_indices: out_of_range,
        degenerate_triangles: degenerate,
        boundary_edges: boundary,
        non_manifold_edges: non_manifold,
        watertight,
        consistent_winding: consistent,
        euler_characteristic: nv as i64 - edge_count as i64 + mesh.triangles.len() as i64,
        signed_volume,
        bounding_box: mesh.bounding_box(),
    }
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn tetrahedron() -> TriangleMesh {
        let v = vec![
            Point3::new(1.0, 1.0, 1.0),
            Point3::new(1.0, -1.0, -1.0),
            Point3::new(-1.0, 1.0, -1.0),
            Point3::new(-1.0, -1.0, 1.0),
        ];
        let mut m = TriangleMesh::new(v, vec![[0, 1, 2], [0, 3, 1], [0, 2, 3], [1, 3, 2]]);
        if m.signed_volume() < 0.0 {
            m.flip_winding();
        }
        m
    }

    pub fn unit_cube() -> TriangleMesh {
        let v: Vec<Point3<f64>> = (0..8)
            .map(|i| Point3::new((i & 1) as f64, ((i >> 1) & 1) as f64, ((i >> 2) & 1) as f64))
            .collect();
        let quads = [
            [0, 2, 3, 1], // z = 0, normal -z
            [4, 5, 7, 6], // z = 1
            [0, 1, 5, 4], // y = 0
            [2, 6, 7, 3], // y = 1
            [0, 4, 6, 2], // x = 0
            [1, 3, 7, 5], // x = 1
        ];
        let tris = quads
            .iter()
            .flat_map(|q| [[q[0], q[1], q[2]], [q[0], q[2], q[3]]])
            .collect();
        TriangleMesh::new(v, tris)
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn tetrahedron_is_watertight() {
        let r = validate_mesh(&tetrahedron());
        assert!(r.watertight);
        assert!(r.consistent_winding);
        assert!(r.signed_volume > 0.0);
        assert_eq!(r.euler_characteristic, 2);
        assert_eq!(r.degenerate_triangles, 0);
    }

    #[test]
    fn open_tetrahedron_reports_three_boundary_edges() {
        let mut m = tetrahedron();
        m.triangles.pop();
        let r = validate_mesh(&m);
        assert!(!r.watertight);
        assert_eq!(r.boundary_edges.len(), 3);
    }

    #[test]
    fn unit_cube_volume() {
        let r = validate_mesh(&unit_cube());
        assert!(r.watertight && r.consistent_winding);
        assert!((r.signed_volume - 1.0).abs() <= 1e-12, "{}", r.signed_volume);
        assert_eq!(r.triangle_count, 12);
        let bb = r.bounding_box.unwrap();
        assert_eq!(bb.min, [0.0; 3]);
        assert_eq!(bb.max, [1.0; 3]);
    }

    #[test]
    fn inconsistent_winding_and_bad_indices_are_reported() {
        let mut m = unit_cube();
        m.triangles[0].swap(1, 2);
        let r = validate_mesh(&m);
        assert!(r.watertight);
        assert!(!r.consistent_winding);

        let mut m = tetrahedron();
        m.triangles.push([0, 1, 9]);
        m.triangles.push([0, 0, 1]);
        let r = validate_mesh(&m);
        assert_eq!(r.out_of_range_indices, 1);
        assert_eq!(r.degenerate_triangles, 1);
        assert!(!r.watertight);
    }

    #[test]
    fn obj_round_trip_preserves_mesh() {
        let mut m = unit_cube();
        m.class_id = 2;
        m.instance_id = 7;
        m.uv = m.vertices.iter().map(|v| [v.x * 0.3, v.y * 0.7]).collect();
        let back = parse_obj(&m.to_obj_string()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn obj_polygons_and_missing_attributes() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        let m = parse_obj(text).unwrap();
        assert_eq!(m.triangles.len(), 2);
        assert!((m.normals[0] - Vector3::z()).norm() < 1e-12);
        assert!(parse_obj("v 0 0 0\nf 1 2 3\n").is_err());
        assert!(parse_obj("v 0 0\n").is_err());
    }

    #[test]
    fn ply_header_counts() {
        let s = tetrahedron().to_ply_string();
        assert!(s.contains("element vertex 4\n"));
        assert!(s.contains("element face 4\n"));
        assert_eq!(s.lines().filter(|l| l.starts_with("3 ")).count(), 4);
    }
}
