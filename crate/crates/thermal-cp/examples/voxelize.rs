//! Voxelized bodies: cell counts and volume accuracy.

use thermal_cp::born_solver::{voxelize, voxelize_with, CellVolumes, Shape, VoxelOptions};
use thermal_cp::materials::Material;

fn main() -> thermal_cp::Result<()> {
    let shapes = [
        Shape::Sphere { radius: 100.0 },
        Shape::AnnularCylinder {
            inner_radius: 100.0,
            outer_radius: 300.0,
            length: 1000.0,
        },
        Shape::Slab {
            thickness: 50.0,
            lateral: 500.0,
        },
    ];
    let riemann = VoxelOptions {
        volumes: CellVolumes::Riemann,
        ..Default::default()
    };
    for shape in &shapes {
        let exact = shape.volume().unwrap();
        for res in [8, 16] {
            let frac = voxelize(shape, res, Material::PerfectConductor)?;
            let plain = voxelize_with(shape, res, Material::PerfectConductor, &riemann)?;
            println!(
                "{:<16} res {res:>2}: {:>5} cells, volume ratio {:.4} fractional, {:.4} riemann, hash {}",
                format!("{:?}", shape).split_whitespace().next().unwrap(),
                frac.len(),
                frac.total_volume() / exact,
                plain.total_volume() / exact,
                frac.hash()
            );
        }
    }
    Ok(())
}
