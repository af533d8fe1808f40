//! Voxelized bodies on a cubic lattice.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::Vector3;
use sha2::{Digest, Sha256};

use crate::materials::Material;
use crate::{Error, Result};

pub const DEFAULT_MAX_CELLS: usize = 20_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Ball of radius R centred at the origin.
    Sphere { radius: f64 },
    /// Hollow cylinder along z, centred at the origin.
    AnnularCylinder {
        inner_radius: f64,
        outer_radius: f64,
        length: f64,
    },
    /// Square slab occupying −thickness < z < 0 and |x|, |y| < lateral/2.
    Slab { thickness: f64, lateral: f64 },
    /// Several shapes translated by offsets; later entries never overwrite
    /// earlier cells.
    Union(Vec<(Shape, Vector3<f64>)>),
}

impl Shape {
    pub fn contains(&self, p: &Vector3<f64>) -> bool {
        match self {
            Shape::Sphere { radius } => p.norm_squared() < radius * radius,
            Shape::AnnularCylinder {
                inner_radius,
                outer_radius,
                length,
            } => {
                let r2 = p.x * p.x + p.y * p.y;
                r2 > inner_radius * inner_radius
                    && r2 < outer_radius * outer_radius
                    && p.z.abs() < 0.5 * length
            }
            Shape::Slab { thickness, lateral } => {
                p.z < 0.0 && p.z > -thickness && p.x.abs() < 0.5 * lateral && p.y.abs() < 0.5 * lateral
            }
            Shape::Union(parts) => parts.iter().any(|(s, o)| s.contains(&(p - o))),
        }
    }

    /// Axis-aligned bounding box (min, max).
    pub fn bounds(&self) -> (Vector3<f64>, Vector3<f64>) {
        match self {
            Shape::Sphere { radius } => (Vector3::repeat(-radius), Vector3::repeat(*radius)),
            Shape::AnnularCylinder {
                outer_radius,
                length,
                ..
            } => (
                Vector3::new(-outer_radius, -outer_radius, -0.5 * length),
                Vector3::new(*outer_radius, *outer_radius, 0.5 * length),
            ),
            Shape::Slab { thickness, lateral } => (
                Vector3::new(-0.5 * lateral, -0.5 * lateral, -thickness),
                Vector3::new(0.5 * lateral, 0.5 * lateral, 0.0),
            ),
            Shape::Union(parts) => {
                let mut lo = Vector3::repeat(f64::INFINITY);
                let mut hi = Vector3::repeat(f64::NEG_INFINITY);
                for (s, o) in parts {
                    let (a, b) = s.bounds();
                    lo = lo.inf(&(a + o));
                    hi = hi.sup(&(b + o));
                }
                (lo, hi)
            }
        }
    }

    /// Length spanned by `resolution` cells: the diameter for spheres, the
    /// outer diameter for annular cylinders, the lateral width for slabs and
    /// the largest bounding-box edge for unions.
    pub fn reference_length(&self) -> f64 {
        match self {
            Shape::Sphere { radius } => 2.0 * radius,
            Shape::AnnularCylinder { outer_radius, .. } => 2.0 * outer_radius,
            Shape::Slab { lateral, .. } => *lateral,
            Shape::Union(_) => {
                let (lo, hi) = self.bounds();
                (hi - lo).max()
            }
        }
    }

    pub fn volume(&self) -> Option<f64> {
        match self {
            Shape::Sphere { radius } => Some(4.0 / 3.0 * PI * radius.powi(3)),
            Shape::AnnularCylinder {
                inner_radius,
                outer_radius,
                length,
            } => Some(PI * (outer_radius * outer_radius - inner_radius * inner_radius) * length),
            Shape::Slab { thickness, lateral } => Some(thickness * lateral * lateral),
            Shape::Union(_) => None,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match self {
            Shape::Sphere { radius } => *radius > 0.0,
            Shape::AnnularCylinder {
                inner_radius,
                outer_radius,
                length,
            } => *inner_radius >= 0.0 && outer_radius > inner_radius && *length > 0.0,
            Shape::Slab { thickness, lateral } => *thickness > 0.0 && *lateral > 0.0,
            Shape::Union(parts) => {
                for (s, _) in parts {
                    s.validate()?;
                }
                !parts.is_empty()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::validation(format!("invalid shape dimensions: {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CellVolumes {
    /// Every cell whose centre is inside gets the full volume d³.
    Riemann,
    /// Boundary cells get the sub-sampled fraction of d³ inside the shape.
    Fractional { subsamples: usize },
}

#[derive(Debug, Clone, Copy)]
pub struct VoxelOptions {
    pub volumes: CellVolumes,
    pub max_cells: usize,
}

impl Default for VoxelOptions {
    fn default() -> Self {
        VoxelOptions {
            volumes: CellVolumes::Fractional { subsamples: 8 },
            max_cells: DEFAULT_MAX_CELLS,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub index: [i64; 3],
    pub center: Vector3<f64>,
    pub volume: f64,
    pub material: usize,
}

/// Cubic cells on the lattice origin + spacing·index.
#[derive(Debug, Clone)]
pub struct VoxelBody {
    pub label: String,
    pub spacing: f64,
    pub origin: Vector3<f64>,
    pub cells: Vec<Cell>,
    pub materials: Vec<Material>,
    lookup: HashMap<[i64; 3], usize>,
    hash: String,
}

impl VoxelBody {
    /// Builds a body from lattice indices. Cell centres are origin + spacing·index.
    pub fn from_lattice(
        label: impl Into<String>,
        spacing: f64,
        origin: Vector3<f64>,
        cells: Vec<([i64; 3], f64, usize)>,
        materials: Vec<Material>,
    ) -> Result<Self> {
        if !(spacing > 0.0) {
            return Err(Error::validation("lattice spacing must be positive"));
        }
        let mut lookup = HashMap::with_capacity(cells.len());
        let mut out = Vec::with_capacity(cells.len());
        for (n, (index, volume, material)) in cells.into_iter().enumerate() {
            if !(volume > 0.0) {
                return Err(Error::validation(format!("cell {n} has non-positive volume")));
            }
            if material >= materials.len() {
                return Err(Error::validation(format!("cell {n} references missing material {material}")));
            }
            if lookup.insert(index, n).is_some() {
                return Err(Error::validation(format!("duplicate cell at lattice index {index:?}")));
            }
            let center = origin + Vector3::new(index[0] as f64, index[1] as f64, index[2] as f64) * spacing;
            out.push(Cell {
                index,
                center,
                volume,
                material,
            });
        }
        for m in &materials {
            m.validate()?;
        }
        let mut body = VoxelBody {
            label: label.into(),
            spacing,
            origin,
            cells: out,
            materials,
            lookup,
            hash: String::new(),
        };
        body.hash = body.compute_hash();
        Ok(body)
    }

    pub fn empty(label: impl Into<String>, spacing: f64) -> Self {
        VoxelBody::from_lattice(label, spacing, Vector3::zeros(), vec![], vec![]).expect("empty body is valid")
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn total_volume(&self) -> f64 {
        self.cells.iter().map(|c| c.volume).sum()
    }

    pub fn cell_at(&self, index: [i64; 3]) -> Option<usize> {
        self.lookup.get(&index).copied()
    }

    /// Content hash of lattice, volumes and materials.
    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn bounds(&self) -> (Vector3<f64>, Vector3<f64>) {
        let h = 0.5 * self.spacing;
        let mut lo = Vector3::repeat(f64::INFINITY);
        let mut hi = Vector3::repeat(f64::NEG_INFINITY);
        for c in &self.cells {
            lo = lo.inf(&c.center.add_scalar(-h));
            hi = hi.sup(&c.center.add_scalar(h));
        }
        (lo, hi)
    }

    /// Errors when `r` lies inside or on the surface of any cell.
    pub fn check_outside(&self, r: &Vector3<f64>) -> Result<()> {
        let h = 0.5 * self.spacing;
        for c in &self.cells {
            let d = c.center - r;
            if d.x.abs() <= h && d.y.abs() <= h && d.z.abs() <= h {
                return Err(Error::validation(format!(
                    "evaluation point ({}, {}, {}) nm lies inside cell {:?} of body '{}'",
                    r.x, r.y, r.z, c.index, self.label
                )));
            }
        }
        Ok(())
    }

    fn compute_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.spacing.to_le_bytes());
        for v in self.origin.iter() {
            h.update(v.to_le_bytes());
        }
        for c in &self.cells {
            for i in c.index {
                h.update(i.to_le_bytes());
            }
            h.update(c.volume.to_le_bytes());
            h.update((c.material as u64).to_le_bytes());
        }
        for m in &self.materials {
            h.update(m.tag().as_bytes());
        }
        h.finalize().iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

/// Cubic cells whose centres lie inside `shape`, with `resolution` cells
/// across the shape's reference length. The lattice has a vertex at the
/// origin so mirror planes through the origin never cut through cells.
pub fn voxelize(shape: &Shape, resolution: usize, material: Material) -> Result<VoxelBody> {
    voxelize_with(shape, resolution, material, &VoxelOptions::default())
}

pub fn voxelize_with(
    shape: &Shape,
    resolution: usize,
    material: Material,
    options: &VoxelOptions,
) -> Result<VoxelBody> {
    shape.validate()?;
    if resolution < 4 {
        return Err(Error::validation(format!("resolution {resolution} is below the minimum of 4")));
    }
    material.validate()?;
    let d = shape.reference_length() / resolution as f64;
    let (lo, hi) = shape.bounds();
    let origin = Vector3::repeat(0.5 * d);
    let lo_i: Vec<i64> = (0..3).map(|a| ((lo[a] - origin[a]) / d).floor() as i64 - 1).collect();
    let hi_i: Vec<i64> = (0..3).map(|a| ((hi[a] - origin[a]) / d).ceil() as i64 + 1).collect();
    let estimate = (0..3).map(|a| (hi_i[a] - lo_i[a] + 1) as f64).product::<f64>();
    if let Some(v) = shape.volume() {
        let expected = v / (d * d * d);
        if expected > 1.2 * options.max_cells as f64 {
            return Err(Error::Resource(format!(
                "about {expected:.0} cells needed, limit is {}",
                options.max_cells
            )));
        }
    }
    if estimate > 1e9 {
        return Err(Error::Resource("lattice bounding box too large".into()));
    }
    let sub_offsets: Vec<Vector3<f64>> = match options.volumes {
        CellVolumes::Riemann => vec![],
        CellVolumes::Fractional { subsamples } => {
            let n = subsamples.max(1);
            let s: Vec<f64> = (0..n).map(|k| ((k as f64 + 0.5) / n as f64 - 0.5) * d).collect();
            let mut v = Vec::with_capacity(n * n * n);
            for a in &s {
                for b in &s {
                    for c in &s {
                        v.push(Vector3::new(*a, *b, *c));
                    }
                }
            }
            v
        }
    };
    let mut cells = Vec::new();
    for i in lo_i[0]..=hi_i[0] {
        for j in lo_i[1]..=hi_i[1] {
            for k in lo_i[2]..=hi_i[2] {
                let c = origin + Vector3::new(i as f64, j as f64, k as f64) * d;
                if !shape.contains(&c) {
                    continue;
                }
                let volume = if sub_offsets.is_empty() {
                    d * d * d
                } else {
                    let inside = sub_offsets.iter().filter(|o| shape.contains(&(c + *o))).count();
                    d * d * d * inside as f64 / sub_offsets.len() as f64
                };
                if volume > 0.0 {
                    cells.push(([i, j, k], volume, 0));
                }
                if cells.len() > options.max_cells {
                    return Err(Error::Resource(format!(
                        "cell count exceeds the configured maximum of {}",
                        options.max_cells
                    )));
                }
            }
        }
    }
    let label = format!("{shape:?}@{resolution}");
    VoxelBody::from_lattice(label, d, origin, cells, vec![material])
}

pub type SharedBody = Arc<VoxelBody>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_lattice_is_mirror_symmetric() {
        let b = voxelize(&Shape::Sphere { radius: 1.0 }, 10, Material::PerfectConductor).unwrap();
        for c in &b.cells {
            let m = [-1 - c.index[0], c.index[1], c.index[2]];
            let j = b.cell_at(m).expect("mirror cell");
            assert!((b.cells[j].volume - c.volume).abs() < 1e-15);
        }
    }

    #[test]
    fn slab_top_face_at_zero() {
        let b = voxelize(
            &Shape::Slab {
                thickness: 2.0,
                lateral: 8.0,
            },
            8,
            Material::PerfectConductor,
        )
        .unwrap();
        let (lo, hi) = b.bounds();
        assert!((hi.z - 0.0).abs() < 1e-12 && (lo.z + 2.0).abs() < 1e-12);
        assert_eq!(b.len(), 128);
    }

    #[test]
    fn inside_point_rejected() {
        let b = voxelize(&Shape::Sphere { radius: 1.0 }, 8, Material::PerfectConductor).unwrap();
        assert!(b.check_outside(&Vector3::new(0.0, 0.0, 0.5)).is_err());
        assert!(b.check_outside(&Vector3::new(0.0, 0.0, 2.0)).is_ok());
    }
}
