use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use nalgebra::{Isometry3, Point3, Quaternion, Translation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};

use super::{ClassId, Heightfield, Placement, ReefError, WaterMedium};
use crate::shellgen::{BoundingBox, TriangleMesh};

/// Objects are lowered into the substrate by this fraction of their height.
pub const SINK_FRACTION: f64 = 0.1;

/// Largest usable instance id; 65535 is the mask miss value.
pub const MAX_INSTANCE_ID: u32 = 65534;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lighting {
    /// Direction the sunlight travels (points down into the water).
    pub sun_direction: [f64; 3],
    pub ambient: f64,
}

impl Default for Lighting {
    fn default() -> Self {
        let d = Vector3::new(0.3, 0.2, -1.0).normalize();
        Self {
            sun_direction: [d.x, d.y, d.z],
            ambient: 0.35,
        }
    }
}

impl Lighting {
    pub fn validate(&self) -> Result<(), ReefError> {
        let n = Vector3::from(self.sun_direction).norm();
        if !n.is_finite() || (n - 1.0).abs() > 1e-9 {
            return Err(ReefError::InvalidParameter("sun_direction must be a unit vector".into()));
        }
        if !(0.0..=1.0).contains(&self.ambient) {
            return Err(ReefError::InvalidParameter("ambient must lie in [0, 1]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SceneInstance {
    /// Index into [`ReefScene::meshes`].
    pub mesh: usize,
    /// Mesh-to-world transform.
    pub pose: Isometry3<f64>,
    pub class_id: ClassId,
    pub instance_id: u32,
}

/// A composed reef. `instances[0]` is always the seabed (instance id 0,
/// mesh 0, identity pose).
#[derive(Debug, Clone, PartialEq)]
pub struct ReefScene {
    pub heightfield: Heightfield,
    pub meshes: Vec<Arc<TriangleMesh>>,
    pub instances: Vec<SceneInstance>,
    pub medium: WaterMedium,
    pub sun_direction: Vector3<f64>,
    pub ambient: f64,
    pub seed: u64,
}

fn mesh_z_range(mesh: &TriangleMesh) -> (f64, f64) {
    mesh.vertices
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v.z), hi.max(v.z)))
}

/// Builds the scene: the seabed becomes instance 0 and every placement gets
/// the next library mesh of its class (round-robin), an ascending instance
/// id, and a pose that beds it [`SINK_FRACTION`] of its height into the
/// substrate. Library meshes are matched to classes by their `class_id`.
pub fn compose_scene(
    hf: &Heightfield,
    placements: &[Placement],
    library: &[TriangleMesh],
    medium: WaterMedium,
    lighting: Lighting,
    seed: u64,
) -> Result<ReefScene, ReefError> {
    hf.validate()?;
    medium.validate()?;
    lighting.validate()?;
    if placements.len() > MAX_INSTANCE_ID as usize {
        return Err(ReefError::Composition(format!(
            "{} placements exceed the {MAX_INSTANCE_ID} instance-id limit",
            placements.len()
        )));
    }

    let mut meshes = vec![Arc::new(hf.to_mesh())];
    let mut by_class: BTreeMap<ClassId, Vec<usize>> = BTreeMap::new();
    for m in library {
        let class = ClassId::from_u8(m.class_id)
            .filter(|c| *c != ClassId::Seabed)
            .ok_or_else(|| ReefError::Composition(format!("library mesh has class_id {}", m.class_id)))?;
        if m.vertices.is_empty() || m.triangles.is_empty() {
            return Err(ReefError::Composition("library mesh is empty".into()));
        }
        meshes.push(Arc::new(m.clone()));
        by_class.entry(class).or_default().push(meshes.len() - 1);
    }

    let mut instances = vec![SceneInstance {
        mesh: 0,
        pose: Isometry3::identity(),
        class_id: ClassId::Seabed,
        instance_id: 0,
    }];
    let mut cursor: BTreeMap<ClassId, usize> = BTreeMap::new();
    for (k, p) in placements.iter().enumerate() {
        let pool = by_class.get(&p.class_id).ok_or_else(|| {
            ReefError::Composition(format!("no library mesh for class {}", p.class_id.name()))
        })?;
        let c = cursor.entry(p.class_id).or_insert(0);
        let mesh_idx = pool[*c % pool.len()];
        *c += 1;
        let (lo, hi) = mesh_z_range(&meshes[mesh_idx]);
        let sink = SINK_FRACTION * (hi - lo);
        let base = p.orientation * Vector3::new(0.0, 0.0, lo);
        let t = p.position.coords - base - Vector3::new(0.0, 0.0, sink);
        instances.push(SceneInstance {
            mesh: mesh_idx,
            pose: Isometry3::from_parts(Translation3::from(t), p.orientation),
            class_id: p.class_id,
            instance_id: (k + 1) as u32,
        });
    }

    let scene = ReefScene {
        heightfield: hf.clone(),
        meshes,
        instances,
        medium,
        sun_direction: Vector3::from(lighting.sun_direction),
        ambient: lighting.ambient,
        seed,
    };
    scene.validate()?;
    Ok(scene)
}

impl ReefScene {
    pub fn validate(&self) -> Result<(), ReefError> {
        self.heightfield.validate()?;
        self.medium.validate()?;
        Lighting {
            sun_direction: [self.sun_direction.x, self.sun_direction.y, self.sun_direction.z],
            ambient: self.ambient,
        }
        .validate()?;
        match self.instances.first() {
            Some(i) if i.instance_id == 0 && i.class_id == ClassId::Seabed => {}
            _ => return Err(ReefError::Composition("instance 0 must be the seabed".into())),
        }
        let mut seen = std::collections::HashSet::new();
        for inst in &self.instances {
            if inst.mesh >= self.meshes.len() {
                return Err(ReefError::Composition(format!(
                    "instance {} references missing mesh {}",
                    inst.instance_id, inst.mesh
                )));
            }
            if inst.instance_id > MAX_INSTANCE_ID || !seen.insert(inst.instance_id) {
                return Err(ReefError::Composition(format!(
                    "instance id {} is duplicated or out of range",
                    inst.instance_id
                )));
            }
        }
        Ok(())
    }

    pub fn instance(&self, id: u32) -> Option<&SceneInstance> {
        self.instances.iter().find(|i| i.instance_id == id)
    }

    pub fn count_class(&self, class: ClassId) -> usize {
        self.instances.iter().filter(|i| i.class_id == class).count()
    }

    /// Mesh of `inst` moved into world coordinates, tagged with its ids.
    pub fn world_mesh(&self, inst: &SceneInstance) -> TriangleMesh {
        let src = &self.meshes[inst.mesh];
        let mut m = TriangleMesh::clone(src);
        for v in &mut m.vertices {
            *v = inst.pose * *v;
        }
        for n in &mut m.normals {
            *n = inst.pose.rotation * *n;
        }
        m.class_id = inst.class_id as u8;
        m.instance_id = inst.instance_id;
        m
    }

    pub fn world_bounding_box(&self, inst: &SceneInstance) -> Option<BoundingBox> {
        let src = &self.meshes[inst.mesh];
        let mut min = [f64::INFINITY; 3];
        let mut max = [f64::NEG_INFINITY; 3];
        for v in &src.vertices {
            let w = inst.pose * v;
            for k in 0..3 {
                min[k] = min[k].min(w[k]);
                max[k] = max[k].max(w[k]);
            }
        }
        (!src.vertices.is_empty()).then_some(BoundingBox { min, max })
    }

    pub fn triangle_count(&self) -> usize {
        self.instances.iter().map(|i| self.meshes[i.mesh].triangles.len()).sum()
    }

    /// Writes `scene.json` plus one OBJ per mesh under `dir/meshes/`.
    pub fn save(&self, dir: &Path) -> Result<(), ReefError> {
        let io = |p: &Path| {
            let path = p.display().to_string();
            move |source| ReefError::Io { path, source }
        };
        let mesh_dir = dir.join("meshes");
        std::fs::create_dir_all(&mesh_dir).map_err(io(&mesh_dir))?;
        let mut mesh_paths = Vec::with_capacity(self.meshes.len());
        for (k, m) in self.meshes.iter().enumerate() {
            let rel = format!("meshes/mesh_{k:04}.obj");
            let p = dir.join(&rel);
            m.write_obj(&p).map_err(io(&p))?;
            mesh_paths.push(rel);
        }
        let doc = SceneDoc {
            seed: self.seed,
            heightfield: self.heightfield.clone(),
            medium: self.medium,
            sun_direction: [self.sun_direction.x, self.sun_direction.y, self.sun_direction.z],
            ambient: self.ambient,
            meshes: mesh_paths,
            instances: self
                .instances
                .iter()
                .map(|i| {
                    let q = i.pose.rotation.quaternion();
                    InstanceDoc {
                        instance_id: i.instance_id,
                        class_id: i.class_id,
                        mesh: i.mesh,
                        translation: [i.pose.translation.x, i.pose.translation.y, i.pose.translation.z],
                        rotation_xyzw: [q.i, q.j, q.k, q.w],
                    }
                })
                .collect(),
        };
        let json = serde_json::to_string_pretty(&doc).map_err(|e| ReefError::Format(e.to_string()))?;
        let p = dir.join("scene.json");
        std::fs::write(&p, json).map_err(io(&p))
    }

    pub fn load(dir: &Path) -> Result<Self, ReefError> {
        let p = dir.join("scene.json");
        let text = std::fs::read_to_string(&p).map_err(|source| ReefError::Io {
            path: p.display().to_string(),
            source,
        })?;
        let doc: SceneDoc = serde_json::from_str(&text).map_err(|e| ReefError::Format(e.to_string()))?;
        let mut meshes = Vec::with_capacity(doc.meshes.len());
        for rel in &doc.meshes {
            let m = TriangleMesh::read_obj(&dir.join(rel)).map_err(|e| ReefError::Format(e.to_string()))?;
            meshes.push(Arc::new(m));
        }
        let instances = doc
            .instances
            .iter()
            .map(|i| {
                let [x, y, z, w] = i.rotation_xyzw;
                let q = Quaternion::new(w, x, y, z);
                if ((q.norm() - 1.0).abs()) > 1e-9 {
                    return Err(ReefError::Format(format!(
                        "instance {} rotation is not a unit quaternion",
                        i.instance_id
                    )));
                }
                Ok(SceneInstance {
                    mesh: i.mesh,
                    pose: Isometry3::from_parts(
                        Translation3::from(Point3::from(i.translation).coords),
                        UnitQuaternion::new_unchecked(q),
                    ),
                    class_id: i.class_id,
                    instance_id: i.instance_id,
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let scene = ReefScene {
            heightfield: doc.heightfield,
            meshes,
            instances,
            medium: doc.medium,
            sun_direction: Vector3::from(doc.sun_direction),
            ambient: doc.ambient,
            seed: doc.seed,
        };
        scene.validate()?;
        Ok(scene)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SceneDoc {
    seed: u64,
    heightfield: Heightfield,
    medium: WaterMedium,
    sun_direction: [f64; 3],
    ambient: f64,
    meshes: Vec<String>,
    instances: Vec<InstanceDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDoc {
    instance_id: u32,
    class_id: ClassId,
    mesh: usize,
    translation: [f64; 3],
    rotation_xyzw: [f64; 4],
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reef::{generate_heightfield, poisson_disk_place, rock_mesh, PlacementConfig, Rect, MAX_TILT_DEG};
    use crate::shellgen::{generate_shell, OysterShellSpec};

    fn library() -> Vec<TriangleMesh> {
        let mut lib: Vec<TriangleMesh> = (0..3)
            .map(|s| generate_shell(&OysterShellSpec::with_seed(s), 16).unwrap())
            .collect();
        lib.push(rock_mesh(0.2, 0.6, 0.3, 1, ClassId::Rock));
        lib.push(rock_mesh(0.05, 0.7, 0.3, 2, ClassId::Stone));
        lib
    }

    fn placements(hf: &Heightfield, oysters: f64, seed: u64) -> Vec<Placement> {
        poisson_disk_place(
            hf,
            &PlacementConfig {
                oyster_density: oysters,
                rock_density: 1.0,
                stone_density: 2.0,
                min_spacing: 0.1,
                region: Rect::new([-1.0, -1.0], [1.0, 1.0]),
                seed,
            },
        )
        .unwrap()
    }

    #[test]
    fn empty_placement_gives_only_seabed() {
        let hf = Heightfield::flat(5, 5, 0.5).unwrap();
        let s = compose_scene(&hf, &[], &library(), WaterMedium::clear(), Lighting::default(), 0).unwrap();
        assert_eq!(s.instances.len(), 1);
        assert_eq!(s.instances[0].class_id, ClassId::Seabed);
    }

    #[test]
    fn ids_are_unique_and_ascending() {
        let hf = Heightfield::flat(9, 9, 0.25).unwrap();
        let oysters: Vec<Placement> = placements(&hf, 2.5, 4)
            .into_iter()
            .filter(|p| p.class_id == ClassId::Oyster)
            .collect();
        assert_eq!(oysters.len(), 10);
        let s = compose_scene(&hf, &oysters, &library(), WaterMedium::clear(), Lighting::default(), 0).unwrap();
        let ids: Vec<u32> = s.instances.iter().map(|i| i.instance_id).collect();
        assert_eq!(ids, (0..=10).collect::<Vec<_>>());
        // Round-robin over the three shells.
        let used: Vec<usize> = s.instances[1..].iter().map(|i| i.mesh).collect();
        assert_eq!(&used[..4], &[1, 2, 3, 1]);
    }

    #[test]
    fn flat_seabed_poses_sit_within_sink_tolerance() {
        let hf = Heightfield::flat(9, 9, 0.25).unwrap();
        let p = placements(&hf, 20.0, 8);
        let s = compose_scene(&hf, &p, &library(), WaterMedium::clear(), Lighting::default(), 0).unwrap();
        let tilt = MAX_TILT_DEG.to_radians().sin();
        for inst in &s.instances[1..] {
            let (lo, hi) = mesh_z_range(&s.meshes[inst.mesh]);
            let h = hi - lo;
            let z = inst.pose.translation.z;
            assert!(z >= -SINK_FRACTION * h - 1e-12 && z <= 1e-12, "pose z {z}");
            let bb = s.world_bounding_box(inst).unwrap();
            let local = s.meshes[inst.mesh].bounding_box().unwrap().extent();
            let reach = 0.5 * local[0].max(local[1]);
            assert!(bb.min[2] >= -SINK_FRACTION * h - reach * tilt - 1e-9);
            assert!(bb.max[0] >= -1.0 && bb.min[0] <= 1.0 && bb.max[1] >= -1.0 && bb.min[1] <= 1.0);
        }
    }

    #[test]
    fn missing_class_in_library_is_an_error() {
        let hf = Heightfield::flat(5, 5, 0.5).unwrap();
        let p = placements(&hf, 5.0, 1);
        let shells_only: Vec<TriangleMesh> = library().into_iter().filter(|m| m.class_id == 1).collect();
        let err = compose_scene(&hf, &p, &shells_only, WaterMedium::clear(), Lighting::default(), 0).unwrap_err();
        assert!(matches!(err, ReefError::Composition(_)), "{err}");
    }

    #[test]
    fn scene_round_trips_through_json_and_obj() {
        let hf = generate_heightfield(9, 9, 0.25, 0.05, 3, 2).unwrap();
        let p = placements(&hf, 5.0, 3);
        let s = compose_scene(&hf, &p, &library(), WaterMedium::clear(), Lighting::default(), 42).unwrap();
        let dir = tempfile::tempdir().unwrap();
        s.save(dir.path()).unwrap();
        let back = ReefScene::load(dir.path()).unwrap();
        assert_eq!(back.heightfield, s.heightfield);
        assert_eq!(back.instances, s.instances);
        assert_eq!(back.medium, s.medium);
        assert_eq!(back.seed, 42);
        for (a, b) in back.meshes.iter().zip(&s.meshes) {
            assert_eq!(a.vertices, b.vertices);
            assert_eq!(a.triangles, b.triangles);
            assert_eq!(a.class_id, b.class_id);
        }
    }

    #[test]
    fn world_mesh_carries_instance_tags() {
        let hf = Heightfield::flat(5, 5, 0.5).unwrap();
        let p = placements(&hf, 5.0, 5);
        let s = compose_scene(&hf, &p, &library(), WaterMedium::clear(), Lighting::default(), 0).unwrap();
        let inst = &s.instances[3];
        let w = s.world_mesh(inst);
        assert_eq!(w.instance_id, 3);
        assert_eq!(w.class_id, inst.class_id as u8);
        assert_eq!(s.triangle_count(), s.instances.iter().map(|i| s.meshes[i.mesh].triangles.len()).sum::<usize>());
    }
}
