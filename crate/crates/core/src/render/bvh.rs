use nalgebra::{Point3, Vector3};

use super::RenderError;
use crate::reef::ReefScene;

/// Largest triangle count stored in one leaf.
pub const MAX_LEAF_SIZE: usize = 4;
/// Hits closer than this are ignored (self-intersection guard).
pub const T_MIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ray {
    pub origin: Point3<f64>,
    pub dir: Vector3<f64>,
}

impl Ray {
    /// `dir` must already be unit length (within 1e-9).
    pub fn new(origin: Point3<f64>, dir: Vector3<f64>) -> Result<Self, RenderError> {
        let n = dir.norm();
        if !n.is_finite() || (n - 1.0).abs() > 1e-9 || origin.iter().any(|c| !c.is_finite()) {
            return Err(RenderError::Domain(format!("ray direction norm {n} is not 1")));
        }
        Ok(Self { origin, dir })
    }

    pub fn at(&self, t: f64) -> Point3<f64> {
        self.origin + self.dir * t
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub distance: f64,
    pub point: Point3<f64>,
    /// Unit geometric normal, turned to face the incoming ray.
    pub normal: Vector3<f64>,
    pub instance_id: u32,
    pub class_id: u8,
    pub uv: [f64; 2],
    /// Index of the triangle in input order.
    pub triangle: u32,
}

/// World-space triangle with the tags the renderer and sonar report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Triangle {
    pub v: [Point3<f64>; 3],
    pub uv: [[f64; 2]; 3],
    pub instance_id: u32,
    pub class_id: u8,
}

#[derive(Debug, Clone, Copy)]
struct PackedTri {
    v0: Point3<f64>,
    e1: Vector3<f64>,
    e2: Vector3<f64>,
    normal: Vector3<f64>,
    det_eps: f64,
    index: u32,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Aabb {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Aabb {
    fn empty() -> Self {
        Self {
            min: [f64::INFINITY; 3],
            max: [f64::NEG_INFINITY; 3],
        }
    }

    fn grow(&mut self, p: &Point3<f64>) {
        for k in 0..3 {
            self.min[k] = self.min[k].min(p[k]);
            self.max[k] = self.max[k].max(p[k]);
        }
    }

    pub fn contains(&self, other: &Aabb) -> bool {
        (0..3).all(|k| self.min[k] <= other.min[k] && self.max[k] >= other.max[k])
    }

    /// Entry distance of the ray into the box, if it enters before `t_max`.
    fn entry(&self, origin: &Point3<f64>, inv_dir: &[f64; 3], t_max: f64) -> Option<f64> {
        let mut t0 = f64::NEG_INFINITY;
        let mut t1 = f64::INFINITY;
        for k in 0..3 {
            if inv_dir[k].is_infinite() {
                // Ray parallel to this slab: inside it or never.
                if origin[k] < self.min[k] || origin[k] > self.max[k] {
                    return None;
                }
                continue;
            }
            let a = (self.min[k] - origin[k]) * inv_dir[k];
            let b = (self.max[k] - origin[k]) * inv_dir[k];
            t0 = t0.max(a.min(b));
            t1 = t1.min(a.max(b));
        }
        (t1 >= t0.max(0.0) && t0 <= t_max).then_some(t0)
    }
}

/// Flattened BVH node. Leaves cover `start..start + count` of the internal
/// triangle order; inner nodes keep their left child at the next index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BvhNode {
    pub bounds: Aabb,
    pub start: u32,
    pub count: u32,
    pub right: u32,
}

impl BvhNode {
    pub fn is_leaf(&self) -> bool {
        self.count > 0
    }
}

/// Median-split bounding volume hierarchy over world-space triangles.
#[derive(Debug, Clone)]
pub struct AccelStructure {
    tris: Vec<PackedTri>,
    /// Per-triangle data in input order.
    source: Vec<Triangle>,
    nodes: Vec<BvhNode>,
}

/// Möller–Trumbore; both faces count. Returns (t, u, v).
#[inline]
fn intersect_tri(tri: &PackedTri, ray: &Ray) -> Option<(f64, f64, f64)> {
    let pvec = ray.dir.cross(&tri.e2);
    let det = tri.e1.dot(&pvec);
    if det.abs() <= tri.det_eps {
        return None;
    }
    let inv = 1.0 / det;
    let tvec = ray.origin - tri.v0;
    let u = tvec.dot(&pvec) * inv;
    if !(0.0..=1.0).contains(&u) {
        return None;
    }
    let qvec = tvec.cross(&tri.e1);
    let v = ray.dir.dot(&qvec) * inv;
    if v < 0.0 || u + v > 1.0 {
        return None;
    }
    let t = tri.e2.dot(&qvec) * inv;
    (t > T_MIN).then_some((t, u, v))
}

fn centroid(t: &Triangle) -> [f64; 3] {
    let c = (t.v[0].coords + t.v[1].coords + t.v[2].coords) / 3.0;
    [c.x, c.y, c.z]
}

impl AccelStructure {
    /// Collects every instance's world triangles (instances in scene order,
    /// triangles in mesh order) and builds the hierarchy.
    pub fn from_scene(scene: &ReefScene) -> Result<Self, RenderError> {
        let mut tris = Vec::with_capacity(scene.triangle_count());
        for inst in &scene.instances {
            let mesh = &scene.meshes[inst.mesh];
            let world: Vec<Point3<f64>> = mesh.vertices.iter().map(|v| inst.pose * v).collect();
            for t in &mesh.triangles {
                let [a, b, c] = t.map(|i| i as usize);
                let uv = |i: usize| mesh.uv.get(i).copied().unwrap_or([0.0, 0.0]);
                tris.push(Triangle {
                    v: [world[a], world[b], world[c]],
                    uv: [uv(a), uv(b), uv(c)],
                    instance_id: inst.instance_id,
                    class_id: inst.class_id as u8,
                });
            }
        }
        Self::build(tris)
    }

    pub fn build(source: Vec<Triangle>) -> Result<Self, RenderError> {
        if source.is_empty() {
            return Err(RenderError::EmptyScene);
        }
        if source.len() > u32::MAX as usize {
            return Err(RenderError::Domain("too many triangles".into()));
        }
        let centroids: Vec<[f64; 3]> = source.iter().map(centroid).collect();
        let mut order: Vec<u32> = (0..source.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * source.len() / MAX_LEAF_SIZE + 1);
        build_node(&source, &centroids, &mut order, 0, &mut nodes);
        let tris = order
            .iter()
            .map(|&i| {
                let t = &source[i as usize];
                let e1 = t.v[1] - t.v[0];
                let e2 = t.v[2] - t.v[0];
                let n = e1.cross(&e2);
                let nn = n.norm();
                PackedTri {
                    v0: t.v[0],
                    e1,
                    e2,
                    normal: if nn > 0.0 { n / nn } else { Vector3::z() },
                    det_eps: 1e-12 * e1.norm() * e2.norm(),
                    index: i,
                }
            })
            .collect();
        Ok(Self { tris, source, nodes })
    }

    pub fn triangle_count(&self) -> usize {
        self.source.len()
    }

    pub fn nodes(&self) -> &[BvhNode] {
        &self.nodes
    }

    /// Input-order triangle indices stored in a leaf.
    pub fn leaf_triangles(&self, node: &BvhNode) -> Vec<u32> {
        let s = node.start as usize;
        self.tris[s..s + node.count as usize].iter().map(|t| t.index).collect()
    }

    pub fn triangle(&self, index: u32) -> &Triangle {
        &self.source[index as usize]
    }

    fn make_hit(&self, ray: &Ray, slot: usize, t: f64, u: f64, v: f64) -> Hit {
        let p = &self.tris[slot];
        let src = &self.source[p.index as usize];
        let w = 1.0 - u - v;
        let normal = if p.normal.dot(&ray.dir) > 0.0 { -p.normal } else { p.normal };
        Hit {
            distance: t,
            point: ray.at(t),
            normal,
            instance_id: src.instance_id,
            class_id: src.class_id,
            uv: [
                w * src.uv[0][0] + u * src.uv[1][0] + v * src.uv[2][0],
                w * src.uv[0][1] + u * src.uv[1][1] + v * src.uv[2][1],
            ],
            triangle: p.index,
        }
    }

    /// Nearest hit; equal distances resolve to the lower triangle index.
    pub fn intersect(&self, ray: &Ray) -> Option<Hit> {
        let inv = [1.0 / ray.dir.x, 1.0 / ray.dir.y, 1.0 / ray.dir.z];
        let mut best: Option<(f64, u32, usize, f64, f64)> = None;
        let mut best_t = f64::INFINITY;
        let mut stack = [0u32; 64];
        let mut sp = 0;
        self.nodes[0].bounds.entry(&ray.origin, &inv, best_t)?;
        stack[sp] = 0;
        sp += 1;
        while sp > 0 {
            sp -= 1;
            let node = &self.nodes[stack[sp] as usize];
            if node.is_leaf() {
                let s = node.start as usize;
                for slot in s..s + node.count as usize {
                    let tri = &self.tris[slot];
                    if let Some((t, u, v)) = intersect_tri(tri, ray) {
                        let better = match best {
                            None => true,
                            Some((bt, bi, ..)) => t < bt || (t == bt && tri.index < bi),
                        };
                        if better {
                            best = Some((t, tri.index, slot, u, v));
                            best_t = t;
                        }
                    }
                }
                continue;
            }
            let left = stack[sp] as usize + 1;
            let right = node.right as usize;
            let tl = self.nodes[left].bounds.entry(&ray.origin, &inv, best_t);
            let tr = self.nodes[right].bounds.entry(&ray.origin, &inv, best_t);
            match (tl, tr) {
                (Some(a), Some(b)) => {
                    let (near, far) = if a <= b { (left, right) } else { (right, left) };
                    stack[sp] = far as u32;
                    stack[sp + 1] = near as u32;
                    sp += 2;
                }
                (Some(_), None) => {
                    stack[sp] = left as u32;
                    sp += 1;
                }
                (None, Some(_)) => {
                    stack[sp] = right as u32;
                    sp += 1;
                }
                (None, None) => {}
            }
        }
        best.map(|(t, _, slot, u, v)| self.make_hit(ray, slot, t, u, v))
    }

    /// Tests every triangle; same semantics as [`Self::intersect`].
    pub fn intersect_exhaustive(&self, ray: &Ray) -> Option<Hit> {
        let mut best: Option<(f64, u32, usize, f64, f64)> = None;
        for (slot, tri) in self.tris.iter().enumerate() {
            if let Some((t, u, v)) = intersect_tri(tri, ray) {
                let better = match best {
                    None => true,
                    Some((bt, bi, ..)) => t < bt || (t == bt && tri.index < bi),
                };
                if better {
                    best = Some((t, tri.index, slot, u, v));
                }
            }
        }
        best.map(|(t, _, slot, u, v)| self.make_hit(ray, slot, t, u, v))
    }
}

/// Builds the subtree for `order` and returns its node index.
fn build_node(
    source: &[Triangle],
    centroids: &[[f64; 3]],
    order: &mut [u32],
    offset: usize,
    nodes: &mut Vec<BvhNode>,
) -> usize {
    let mut bounds = Aabb::empty();
    let mut cbounds = Aabb::empty();
    for &i in order.iter() {
        for v in &source[i as usize].v {
            bounds.grow(v);
        }
        cbounds.grow(&Point3::from(centroids[i as usize]));
    }
    let idx = nodes.len();
    nodes.push(BvhNode {
        bounds,
        start: offset as u32,
        count: order.len() as u32,
        right: 0,
    });
    if order.len() <= MAX_LEAF_SIZE {
        return idx;
    }
    let ext: Vec<f64> = (0..3).map(|k| cbounds.max[k] - cbounds.min[k]).collect();
    let axis = (0..3).fold(0, |a, k| if ext[k] > ext[a] { k } else { a });
    if ext[axis] <= 0.0 {
        // All centroids coincide; splitting by index still bounds the depth.
        order.sort_unstable();
    } else {
        let mid = order.len() / 2;
        order.select_nth_unstable_by(mid, |&a, &b| {
            centroids[a as usize][axis]
                .total_cmp(&centroids[b as usize][axis])
                .then(a.cmp(&b))
        });
    }
    let mid = order.len() / 2;
    let (lo, hi) = order.split_at_mut(mid);
    nodes[idx].count = 0;
    build_node(source, centroids, lo, offset, nodes);
    let right = build_node(source, centroids, hi, offset + mid, nodes);
    nodes[idx].right = right as u32;
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded_rng;
    use rand::Rng;

    fn tri(a: [f64; 3], b: [f64; 3], c: [f64; 3], id: u32) -> Triangle {
        Triangle {
            v: [Point3::from(a), Point3::from(b), Point3::from(c)],
            uv: [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            instance_id: id,
            class_id: 1,
        }
    }

    fn unit_quad() -> Vec<Triangle> {
        vec![
            tri([-0.5, -0.5, 0.0], [0.5, -0.5, 0.0], [0.5, 0.5, 0.0], 7),
            tri([-0.5, -0.5, 0.0], [0.5, 0.5, 0.0], [-0.5, 0.5, 0.0], 7),
        ]
    }

    /// Independent oracle: plane hit followed by a same-side edge test.
    fn oracle(tris: &[Triangle], o: Point3<f64>, d: Vector3<f64>) -> Option<(f64, u32)> {
        let mut best: Option<(f64, u32)> = None;
        for (i, t) in tris.iter().enumerate() {
            let n = (t.v[1] - t.v[0]).cross(&(t.v[2] - t.v[0]));
            let denom = n.dot(&d);
            if denom.abs() < 1e-300 {
                continue;
            }
            let s = n.dot(&(t.v[0] - o)) / denom;
            if s <= T_MIN {
                continue;
            }
            let p = o + d * s;
            let inside = (0..3).all(|k| {
                let a = t.v[k];
                let b = t.v[(k + 1) % 3];
                (b - a).cross(&(p - a)).dot(&n) >= -1e-12 * n.norm_squared()
            });
            if inside && best.map_or(true, |(bs, _)| s < bs) {
                best = Some((s, i as u32));
            }
        }
        best
    }

    fn random_soup(n: usize, seed: u64) -> Vec<Triangle> {
        let mut rng = seeded_rng(seed);
        (0..n)
            .map(|i| {
                let c = Vector3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
                let mut p = || Point3::from(c + Vector3::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5)));
                let (a, b, cc) = (p(), p(), p());
                Triangle {
                    v: [a, b, cc],
                    uv: [[0.0; 2]; 3],
                    instance_id: i as u32,
                    class_id: 1,
                }
            })
            .collect()
    }

    fn random_ray(rng: &mut impl Rng) -> Ray {
        let o = Point3::new(rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0));
        let target = Point3::new(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let d = target - o;
        Ray::new(o, d / d.norm()).unwrap()
    }

    #[test]
    fn single_triangle_is_one_leaf() {
        let t = tri([0.0, 0.0, 0.0], [1.0, 0.0, 0.5], [0.0, 2.0, 0.0], 1);
        let bvh = AccelStructure::build(vec![t]).unwrap();
        assert_eq!(bvh.nodes().len(), 1);
        assert!(bvh.nodes()[0].is_leaf());
        assert_eq!(bvh.nodes()[0].bounds, Aabb { min: [0.0, 0.0, 0.0], max: [1.0, 2.0, 0.5] });
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(AccelStructure::build(vec![]), Err(RenderError::EmptyScene)));
    }

    #[test]
    fn ray_onto_quad() {
        let bvh = AccelStructure::build(unit_quad()).unwrap();
        let ray = Ray::new(Point3::new(0.1, 0.2, 1.0), -Vector3::z()).unwrap();
        let hit = bvh.intersect(&ray).unwrap();
        assert!((hit.distance - 1.0).abs() < 1e-15);
        assert_eq!(hit.normal, Vector3::z());
        assert_eq!(hit.instance_id, 7);
        // Back face is hit too, normal turned toward the ray.
        let up = Ray::new(Point3::new(0.1, 0.2, -1.0), Vector3::z()).unwrap();
        assert_eq!(bvh.intersect(&up).unwrap().normal, -Vector3::z());
    }

    #[test]
    fn parallel_offset_ray_misses() {
        let bvh = AccelStructure::build(unit_quad()).unwrap();
        let ray = Ray::new(Point3::new(-2.0, 0.0, 0.1), Vector3::x()).unwrap();
        assert!(bvh.intersect(&ray).is_none());
        assert!(bvh.intersect_exhaustive(&ray).is_none());
    }

    #[test]
    fn non_unit_direction_rejected() {
        assert!(Ray::new(Point3::origin(), Vector3::new(0.0, 0.0, 2.0)).is_err());
    }

    #[test]
    fn structure_invariants() {
        let bvh = AccelStructure::build(random_soup(1000, 3)).unwrap();
        let mut seen = vec![0u32; 1000];
        for (i, n) in bvh.nodes().iter().enumerate() {
            if n.is_leaf() {
                assert!(n.count as usize <= MAX_LEAF_SIZE);
                for t in bvh.leaf_triangles(n) {
                    seen[t as usize] += 1;
                    let tr = bvh.triangle(t);
                    for v in &tr.v {
                        assert!((0..3).all(|k| n.bounds.min[k] <= v[k] && v[k] <= n.bounds.max[k]));
                    }
                }
            } else {
                assert!(n.bounds.contains(&bvh.nodes()[i + 1].bounds));
                assert!(n.bounds.contains(&bvh.nodes()[n.right as usize].bounds));
            }
        }
        assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn bvh_matches_exhaustive_and_oracle() {
        let soup = random_soup(1000, 11);
        let bvh = AccelStructure::build(soup.clone()).unwrap();
        let mut rng = seeded_rng(12);
        let mut hits = 0;
        for _ in 0..1000 {
            let ray = random_ray(&mut rng);
            let a = bvh.intersect(&ray);
            let b = bvh.intersect_exhaustive(&ray);
            assert_eq!(a, b);
            let o = oracle(&soup, ray.origin, ray.dir);
            match (a, o) {
                (Some(h), Some((s, i))) => {
                    hits += 1;
                    assert_eq!(h.triangle, i);
                    assert!((h.distance - s).abs() <= 1e-6);
                }
                (None, None) => {}
                (h, o) => panic!("bvh {h:?} vs oracle {o:?}"),
            }
        }
        assert!(hits > 200, "only {hits} hits");
    }

    #[test]
    fn ties_resolve_to_lower_index() {
        let mut quad = unit_quad();
        quad.push(quad[0]);
        quad[2].instance_id = 99;
        let bvh = AccelStructure::build(quad).unwrap();
        let ray = Ray::new(Point3::new(0.3, -0.2, 1.0), -Vector3::z()).unwrap();
        let hit = bvh.intersect(&ray).unwrap();
        assert_eq!(hit.triangle, 0);
    }
}
