//! Scene files: particle, body, evaluation points and numerical settings.
//!
//! A scene is a TOML document:
//!
//! ```toml
//! material = { kind = "drude", plasma_ev = 9.0, gamma_ev = 0.035 }
//! geometry = { shape = "sphere", radius_nm = 5000.0, resolution = 16 }
//!
//! [particle]
//! transitions = [{ omega_ev = 1.9733e-4, d2_debye2 = 1.0, isotropic = true }]
//!
//! [points]
//! positions_nm = [[0.0, 0.0, 10000.0]]
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::born_solver::{
    voxelize_with, CellVolumes, Discretization, Kernel, Method, Shape, SolverOptions, VoxelBody, VoxelOptions,
};
use crate::materials::{Material, Table};
use crate::numerics::{MatsubaraPolicy, QuadratureSpec};
use crate::thermal::{Dipole, Particle, ThermalContext, Transition};
use crate::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScene {
    particle: RawParticle,
    material: RawMaterial,
    geometry: toml::Table,
    #[serde(default)]
    points: Option<RawPoints>,
    #[serde(default)]
    thermal: RawThermal,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    criteria: RawCriteria,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParticle {
    #[serde(default)]
    label: Option<String>,
    transitions: Vec<RawTransition>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTransition {
    omega_ev: f64,
    #[serde(default)]
    d2_debye2: Option<f64>,
    #[serde(default = "yes")]
    isotropic: bool,
    #[serde(default)]
    dyad_debye2: Option<[[f64; 3]; 3]>,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
enum RawMaterial {
    Drude { plasma_ev: f64, gamma_ev: f64 },
    Pec,
    Table { path: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, tag = "shape", rename_all = "snake_case")]
enum RawShape {
    Sphere {
        radius_nm: f64,
    },
    AnnularCylinder {
        inner_radius_nm: f64,
        outer_radius_nm: f64,
        length_nm: f64,
    },
    Slab {
        thickness_nm: f64,
        lateral_nm: f64,
    },
    Union {
        parts: Vec<toml::Table>,
    },
}

/// Geometry keys that are not part of the shape description.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    resolution: usize,
    #[serde(default)]
    max_cells: Option<usize>,
    #[serde(default)]
    volumes: Option<String>,
}

/// Splits `keys` off `table`, returning (shape part, extracted part).
fn split(mut table: toml::Table, keys: &[&str]) -> (toml::Table, toml::Table) {
    let mut taken = toml::Table::new();
    for k in keys {
        if let Some(v) = table.remove(*k) {
            taken.insert((*k).to_string(), v);
        }
    }
    (table, taken)
}

fn parse_shape(table: toml::Table, section: &str) -> Result<Shape> {
    let raw: RawShape = toml::Value::Table(table)
        .try_into()
        .map_err(|e| invalid(section, e))?;
    Ok(match raw {
        RawShape::Sphere { radius_nm } => Shape::Sphere { radius: radius_nm },
        RawShape::AnnularCylinder {
            inner_radius_nm,
            outer_radius_nm,
            length_nm,
        } => Shape::AnnularCylinder {
            inner_radius: inner_radius_nm,
            outer_radius: outer_radius_nm,
            length: length_nm,
        },
        RawShape::Slab {
            thickness_nm,
            lateral_nm,
        } => Shape::Slab {
            thickness: thickness_nm,
            lateral: lateral_nm,
        },
        RawShape::Union { parts } => Shape::Union(
            parts
                .into_iter()
                .map(|part| {
                    let (shape, extra) = split(part, &["offset_nm"]);
                    let offset: [f64; 3] = match extra.get("offset_nm") {
                        Some(v) => v.clone().try_into().map_err(|e| invalid(section, e))?,
                        None => [0.0; 3],
                    };
                    Ok((parse_shape(shape, section)?, Vector3::from(offset)))
                })
                .collect::<Result<Vec<_>>>()?,
        ),
    })
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPoints {
    #[serde(default)]
    positions_nm: Vec<[f64; 3]>,
    #[serde(default)]
    radial: Option<RawRadial>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRadial {
    #[serde(default = "z_axis")]
    direction: [f64; 3],
    start_nm: f64,
    stop_nm: f64,
    count: usize,
}

fn z_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThermal {
    #[serde(default = "room")]
    temperature_k: f64,
    #[serde(default)]
    rel_tail_tol: Option<f64>,
    #[serde(default)]
    j_max: Option<usize>,
    #[serde(default)]
    rel_tol: Option<f64>,
}

fn room() -> f64 {
    300.0
}

impl Default for RawThermal {
    fn default() -> Self {
        RawThermal {
            temperature_k: room(),
            rel_tail_tol: None,
            j_max: None,
            rel_tol: None,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(default)]
    kernel: Option<String>,
    #[serde(default)]
    method: Option<String>,
    #[serde(default)]
    born_terms: Option<usize>,
    #[serde(default)]
    discretization: Option<String>,
    #[serde(default)]
    symmetry: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCriteria {
    #[serde(default)]
    q_factor: Option<f64>,
    #[serde(default)]
    pass: Option<f64>,
    #[serde(default)]
    marginal: Option<f64>,
    #[serde(default)]
    extent_cutoff: Option<f64>,
}

/// A validated scene.
#[derive(Debug, Clone)]
pub struct Scene {
    pub particle: Particle,
    pub material: Material,
    pub shape: Shape,
    pub resolution: usize,
    pub voxel: VoxelOptions,
    pub points: Vec<Vector3<f64>>,
    pub thermal: ThermalContext,
    pub kernel: Kernel,
    pub method: Method,
    pub solver: SolverOptions,
    pub q_factor: Option<f64>,
    pub thresholds: crate::criteria::Thresholds,
    pub extent_cutoff: f64,
    /// SHA-256 of the scene text, first 16 hex digits.
    pub hash: String,
}

fn invalid(section: &str, msg: impl std::fmt::Display) -> Error {
    Error::validation(format!("[{section}] {msg}"))
}

impl Scene {
    /// Reads and validates a scene file.
    pub fn read(path: &Path) -> Result<Scene> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scene::parse(&text, path.parent())
    }

    /// Parses scene text; relative table paths resolve against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Scene> {
        let raw: RawScene = toml::from_str(text).map_err(|e| Error::validation(format!("scene: {e}")))?;

        let transitions = raw
            .particle
            .transitions
            .iter()
            .enumerate()
            .map(|(i, t)| {
                let dipole = match (t.d2_debye2, t.dyad_debye2, t.isotropic) {
                    (Some(d2), None, true) => Dipole::Isotropic(d2),
                    (None, Some(m), false) => Dipole::Dyad(Matrix3::from_row_slice(&m.concat())),
                    (Some(_), None, false) => {
                        return Err(invalid("particle", format!("transition {i}: anisotropic transitions need dyad_debye2")))
                    }
                    _ => {
                        return Err(invalid(
                            "particle",
                            format!("transition {i}: give either d2_debye2 (isotropic) or dyad_debye2 (isotropic = false)"),
                        ))
                    }
                };
                let t = Transition {
                    omega_ev: t.omega_ev,
                    dipole,
                };
                t.validate().map_err(|e| invalid("particle", format!("transition {i}: {e}")))?;
                Ok(t)
            })
            .collect::<Result<Vec<_>>>()?;
        let particle = Particle::new(raw.particle.label.unwrap_or_else(|| "particle".into()), transitions)
            .map_err(|e| invalid("particle", e))?;

        let material = match raw.material {
            RawMaterial::Drude { plasma_ev, gamma_ev } => {
                Material::drude(plasma_ev, gamma_ev).map_err(|e| invalid("material", e))?
            }
            RawMaterial::Pec => Material::PerfectConductor,
            RawMaterial::Table { path } => {
                let full = match base {
                    Some(b) if path.is_relative() => b.join(&path),
                    _ => path,
                };
                Material::Tabulated(Arc::new(Table::read(&full)?))
            }
        };

        let (shape_table, grid_table) = split(raw.geometry, &["resolution", "max_cells", "volumes"]);
        let grid: RawGrid = toml::Value::Table(grid_table)
            .try_into()
            .map_err(|e| invalid("geometry", e))?;
        let shape = parse_shape(shape_table, "geometry")?;
        let mut voxel = VoxelOptions::default();
        if let Some(m) = grid.max_cells {
            voxel.max_cells = m;
        }
        match grid.volumes.as_deref() {
            None | Some("fractional") => {}
            Some("riemann") => voxel.volumes = CellVolumes::Riemann,
            Some(other) => return Err(invalid("geometry", format!("unknown volumes mode '{other}'"))),
        }
        if grid.resolution < 4 {
            return Err(invalid("geometry", format!("resolution {} is below 4", grid.resolution)));
        }

        let mut points: Vec<Vector3<f64>> = Vec::new();
        if let Some(p) = &raw.points {
            points.extend(p.positions_nm.iter().map(|v| Vector3::from(*v)));
            if let Some(r) = &p.radial {
                let dir = Vector3::from(r.direction);
                if dir.norm() == 0.0 || r.count == 0 {
                    return Err(invalid("points", "radial grid needs a nonzero direction and count"));
                }
                let dir = dir.normalize();
                for i in 0..r.count {
                    let s = if r.count == 1 {
                        r.start_nm
                    } else {
                        r.start_nm + (r.stop_nm - r.start_nm) * i as f64 / (r.count - 1) as f64
                    };
                    points.push(dir * s);
                }
            }
        }
        for p in &points {
            if shape.contains(p) {
                return Err(invalid(
                    "points",
                    format!("evaluation point ({}, {}, {}) nm lies inside the body", p.x, p.y, p.z),
                ));
            }
        }

        let mut matsubara = MatsubaraPolicy::default();
        if let Some(v) = raw.thermal.rel_tail_tol {
            matsubara.rel_tail_tol = v;
        }
        if let Some(v) = raw.thermal.j_max {
            matsubara.j_max = v;
        }
        let mut thermal = ThermalContext::new(raw.thermal.temperature_k);
        thermal.matsubara = matsubara;
        if let Some(v) = raw.thermal.rel_tol {
            thermal.quadrature = QuadratureSpec::new(thermal.quadrature.scheme, v);
        }
        thermal.validate().map_err(|e| invalid("thermal", e))?;
        if !(thermal.quadrature.rel_tol > 0.0) {
            return Err(invalid("thermal", "rel_tol must be positive"));
        }

        let kernel: Kernel = raw
            .solver
            .kernel
            .as_deref()
            .unwrap_or("retarded")
            .parse()
            .map_err(|e| invalid("solver", e))?;
        let method = parse_method(raw.solver.method.as_deref().unwrap_or("solve"), raw.solver.born_terms)
            .map_err(|e| invalid("solver", e))?;
        let mut solver = SolverOptions::default();
        match raw.solver.discretization.as_deref() {
            None | Some("galerkin") => {}
            Some("collocation") => solver.discretization = Discretization::Collocation,
            Some(other) => return Err(invalid("solver", format!("unknown discretization '{other}'"))),
        }
        if let Some(s) = raw.solver.symmetry {
            solver.use_symmetry = s;
        }

        let mut thresholds = crate::criteria::Thresholds::default();
        if let Some(v) = raw.criteria.pass {
            thresholds.pass = v;
        }
        if let Some(v) = raw.criteria.marginal {
            thresholds.marginal = v;
        }
        if !(thresholds.pass > 0.0 && thresholds.marginal >= thresholds.pass) {
            return Err(invalid("criteria", "thresholds need 0 < pass ≤ marginal"));
        }
        if let Some(q) = raw.criteria.q_factor {
            if !(q > 0.0) {
                return Err(invalid("criteria", format!("q_factor must be positive, got {q}")));
            }
        }
        let extent_cutoff = raw.criteria.extent_cutoff.unwrap_or(0.01);

        let hash = Sha256::digest(text.as_bytes())
            .iter()
            .take(8)
            .map(|b| format!("{b:02x}"))
            .collect();

        Ok(Scene {
            particle,
            material,
            shape,
            resolution: grid.resolution,
            voxel,
            points,
            thermal,
            kernel,
            method,
            solver,
            q_factor: raw.criteria.q_factor,
            thresholds,
            extent_cutoff,
            hash,
        })
    }

    pub fn voxelize(&self) -> Result<VoxelBody> {
        voxelize_with(&self.shape, self.resolution, self.material.clone(), &self.voxel)
    }

    /// The first evaluation point, required by single-point commands.
    pub fn point(&self) -> Result<Vector3<f64>> {
        self.points
            .first()
            .copied()
            .ok_or_else(|| invalid("points", "scene defines no evaluation point"))
    }
}

/// `solve` or `born` (optionally with the number of series terms).
pub fn parse_method(name: &str, terms: Option<usize>) -> Result<Method> {
    match name {
        "solve" => Ok(Method::DirectSolve),
        "born" => Ok(Method::BornSeries {
            n_max: terms.unwrap_or(20),
        }),
        other => Err(Error::validation(format!("unknown method '{other}' (born|solve)"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
material = { kind = "pec" }
geometry = { shape = "sphere", radius_nm = 100.0, resolution = 8 }
particle = { transitions = [{ omega_ev = 0.5, d2_debye2 = 4.0 }] }
points = { positions_nm = [[0.0, 0.0, 250.0]] }
"#;

    #[test]
    fn minimal_scene_gets_defaults() {
        let s = Scene::parse(MINIMAL, None).unwrap();
        assert_eq!(s.thermal.temperature, 300.0);
        assert_eq!(s.kernel, Kernel::Retarded);
        assert_eq!(s.points.len(), 1);
    }

    #[test]
    fn unknown_key_is_rejected() {
        let text = MINIMAL.replace("resolution = 8", "resolution = 8, colour = 3");
        assert!(Scene::parse(&text, None).is_err());
    }

    #[test]
    fn point_inside_body_is_named() {
        let text = MINIMAL.replace("250.0", "50.0");
        let err = Scene::parse(&text, None).unwrap_err().to_string();
        assert!(err.contains("(0, 0, 50)"), "{err}");
    }

    #[test]
    fn union_parts_take_offsets() {
        let text = MINIMAL.replace(
            r#"geometry = { shape = "sphere", radius_nm = 100.0, resolution = 8 }"#,
            r#"geometry = { shape = "union", resolution = 8, parts = [{ shape = "sphere", radius_nm = 50.0, offset_nm = [0.0, 0.0, -60.0] }, { shape = "sphere", radius_nm = 50.0, offset_nm = [0.0, 0.0, 60.0] }] }"#,
        );
        let s = Scene::parse(&text, None).unwrap();
        assert!(matches!(s.shape, Shape::Union(ref p) if p.len() == 2));
    }
}
