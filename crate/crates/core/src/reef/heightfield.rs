use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::ReefError;
use crate::rng::splitmix64;
use crate::shellgen::TriangleMesh;

/// Wavelength of the coarsest noise octave, in meters.
const BASE_WAVELENGTH_M: f64 = 4.0;

/// Regular grid of seabed elevations, row-major (`heights[j * nx + i]`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Heightfield {
    pub nx: usize,
    pub ny: usize,
    pub cell_size: f64,
    pub heights: Vec<f64>,
    pub origin: [f64; 2],
}

fn lattice_value(seed: u64, octave: u32, ix: i64, iy: i64) -> f64 {
    let h = splitmix64(
        seed ^ splitmix64(u64::from(octave) ^ splitmix64(ix as u64 ^ splitmix64(iy as u64))),
    );
    (h >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

fn smoothstep(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

/// Value noise in [-1, 1]: smoothed bilinear blend of lattice values.
fn value_noise(seed: u64, octave: u32, x: f64, y: f64) -> f64 {
    let (fx, fy) = (x.floor(), y.floor());
    let (ix, iy) = (fx as i64, fy as i64);
    let (tx, ty) = (smoothstep(x - fx), smoothstep(y - fy));
    let v00 = lattice_value(seed, octave, ix, iy);
    let v10 = lattice_value(seed, octave, ix + 1, iy);
    let v01 = lattice_value(seed, octave, ix, iy + 1);
    let v11 = lattice_value(seed, octave, ix + 1, iy + 1);
    let a = v00 + (v10 - v00) * tx;
    let b = v01 + (v11 - v01) * tx;
    (a + (b - a) * ty).clamp(-1.0, 1.0)
}

/// Fractal value-noise seabed. Octave weights halve and are normalized, so
/// `|height| <= amplitude` everywhere.
pub fn generate_heightfield(
    nx: usize,
    ny: usize,
    cell_size: f64,
    amplitude: f64,
    octaves: u32,
    seed: u64,
) -> Result<Heightfield, ReefError> {
    if nx < 2 || ny < 2 {
        return Err(ReefError::InvalidParameter("heightfield needs nx, ny >= 2".into()));
    }
    if !(cell_size.is_finite() && cell_size > 0.0) {
        return Err(ReefError::InvalidParameter("cell_size must be > 0".into()));
    }
    if !(amplitude.is_finite() && amplitude >= 0.0) {
        return Err(ReefError::InvalidParameter("amplitude must be >= 0".into()));
    }
    if octaves < 1 {
        return Err(ReefError::InvalidParameter("octaves must be >= 1".into()));
    }
    let origin = [
        -0.5 * cell_size * (nx - 1) as f64,
        -0.5 * cell_size * (ny - 1) as f64,
    ];
    let norm: f64 = (0..octaves).map(|o| 0.5f64.powi(o as i32)).sum();
    let mut heights = Vec::with_capacity(nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            let x = origin[0] + i as f64 * cell_size;
            let y = origin[1] + j as f64 * cell_size;
            let mut acc = 0.0;
            for o in 0..octaves {
                let f = 2f64.powi(o as i32) / BASE_WAVELENGTH_M;
                acc += 0.5f64.powi(o as i32) * value_noise(seed, o, x * f, y * f);
            }
            let h = (amplitude * (acc / norm).clamp(-1.0, 1.0)) + 0.0;
            heights.push(h);
        }
    }
    Ok(Heightfield {
        nx,
        ny,
        cell_size,
        heights,
        origin,
    })
}

impl Heightfield {
    pub fn flat(nx: usize, ny: usize, cell_size: f64) -> Result<Self, ReefError> {
        generate_heightfield(nx, ny, cell_size, 0.0, 1, 0)
    }

    pub fn validate(&self) -> Result<(), ReefError> {
        if self.nx < 2 || self.ny < 2 || !(self.cell_size > 0.0) {
            return Err(ReefError::InvalidParameter("degenerate heightfield grid".into()));
        }
        if self.heights.len() != self.nx * self.ny {
            return Err(ReefError::InvalidParameter(format!(
                "heightfield has {} samples, expected {}",
                self.heights.len(),
                self.nx * self.ny
            )));
        }
        if self.heights.iter().any(|h| !h.is_finite()) {
            return Err(ReefError::InvalidParameter("heights must be finite".into()));
        }
        Ok(())
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.heights[j * self.nx + i]
    }

    /// (min, max) corners of the covered area.
    pub fn extent(&self) -> ([f64; 2], [f64; 2]) {
        (
            self.origin,
            [
                self.origin[0] + self.cell_size * (self.nx - 1) as f64,
                self.origin[1] + self.cell_size * (self.ny - 1) as f64,
            ],
        )
    }

    fn cell_coords(&self, x: f64, y: f64) -> (usize, usize, f64, f64) {
        let gx = ((x - self.origin[0]) / self.cell_size).clamp(0.0, (self.nx - 1) as f64);
        let gy = ((y - self.origin[1]) / self.cell_size).clamp(0.0, (self.ny - 1) as f64);
        let i = (gx.floor() as usize).min(self.nx - 2);
        let j = (gy.floor() as usize).min(self.ny - 2);
        (i, j, gx - i as f64, gy - j as f64)
    }

    /// Elevation at (x, y), matching the triangulation returned by
    /// [`Self::to_mesh`]. Points outside the grid clamp to its border.
    pub fn height_at(&self, x: f64, y: f64) -> f64 {
        let (i, j, tx, ty) = self.cell_coords(x, y);
        let h00 = self.at(i, j);
        let h10 = self.at(i + 1, j);
        let h01 = self.at(i, j + 1);
        let h11 = self.at(i + 1, j + 1);
        // Cells are split along the (i,j)–(i+1,j+1) diagonal.
        if tx >= ty {
            h00 + (h10 - h00) * tx + (h11 - h10) * ty
        } else {
            h00 + (h11 - h01) * tx + (h01 - h00) * ty
        }
    }

    /// Upward unit normal of the facet under (x, y).
    pub fn normal_at(&self, x: f64, y: f64) -> Vector3<f64> {
        let (i, j, tx, ty) = self.cell_coords(x, y);
        let c = self.cell_size;
        let h00 = self.at(i, j);
        let h10 = self.at(i + 1, j);
        let h01 = self.at(i, j + 1);
        let h11 = self.at(i + 1, j + 1);
        let (dhdx, dhdy) = if tx >= ty {
            ((h10 - h00) / c, (h11 - h10) / c)
        } else {
            ((h11 - h01) / c, (h01 - h00) / c)
        };
        Vector3::new(-dhdx, -dhdy, 1.0).normalize()
    }

    /// Seabed triangulation (class 0, instance 0), counter-clockwise from above.
    pub fn to_mesh(&self) -> TriangleMesh {
        let mut vertices = Vec::with_capacity(self.nx * self.ny);
        let mut uv = Vec::with_capacity(self.nx * self.ny);
        for j in 0..self.ny {
            for i in 0..self.nx {
                vertices.push(Point3::new(
                    self.origin[0] + i as f64 * self.cell_size,
                    self.origin[1] + j as f64 * self.cell_size,
                    self.at(i, j),
                ));
                uv.push([
                    i as f64 / (self.nx - 1) as f64,
                    j as f64 / (self.ny - 1) as f64,
                ]);
            }
        }
        let idx = |i: usize, j: usize| (j * self.nx + i) as u32;
        let mut tris = Vec::with_capacity(2 * (self.nx - 1) * (self.ny - 1));
        for j in 0..self.ny - 1 {
            for i in 0..self.nx - 1 {
                let (a, b, c, d) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
                tris.push([a, b, c]);
                tris.push([a, c, d]);
            }
        }
        let mut mesh = TriangleMesh::new(vertices, tris);
        mesh.uv = uv;
        mesh.class_id = 0;
        mesh.instance_id = 0;
        mesh
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_amplitude_is_flat() {
        let hf = generate_heightfield(17, 9, 0.1, 0.0, 4, 3).unwrap();
        assert!(hf.heights.iter().all(|h| h.to_bits() == 0.0f64.to_bits()));
    }

    #[test]
    fn deterministic_per_seed() {
        let a = generate_heightfield(33, 33, 0.1, 0.3, 5, 77).unwrap();
        let b = generate_heightfield(33, 33, 0.1, 0.3, 5, 77).unwrap();
        assert_eq!(a, b);
        let c = generate_heightfield(33, 33, 0.1, 0.3, 5, 78).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn amplitude_bounds_every_sample() {
        for seed in 0..20 {
            let hf = generate_heightfield(65, 65, 0.25, 0.2, 6, seed).unwrap();
            let max = hf.heights.iter().fold(0.0f64, |m, h| m.max(h.abs()));
            assert!(max <= 0.2, "seed {seed}: {max}");
            assert!(max > 0.0);
        }
    }

    #[test]
    fn height_query_matches_grid_and_mesh() {
        let hf = generate_heightfield(9, 7, 0.5, 0.4, 3, 5).unwrap();
        for j in 0..hf.ny {
            for i in 0..hf.nx {
                let x = hf.origin[0] + i as f64 * hf.cell_size;
                let y = hf.origin[1] + j as f64 * hf.cell_size;
                assert!((hf.height_at(x, y) - hf.at(i, j)).abs() < 1e-12);
            }
        }
        let n = hf.normal_at(0.1, 0.2);
        assert!((n.norm() - 1.0).abs() < 1e-12 && n.z > 0.0);
        let mesh = hf.to_mesh();
        assert_eq!(mesh.triangles.len(), 2 * 8 * 6);
        assert!(mesh.signed_volume().is_finite());
        assert!(mesh.normals.iter().all(|n| n.z > 0.0));
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate_heightfield(1, 4, 0.1, 0.1, 1, 0).is_err());
        assert!(generate_heightfield(4, 4, 0.0, 0.1, 1, 0).is_err());
        assert!(generate_heightfield(4, 4, 0.1, -0.1, 1, 0).is_err());
        assert!(generate_heightfield(4, 4, 0.1, 0.1, 0, 0).is_err());
    }
}
