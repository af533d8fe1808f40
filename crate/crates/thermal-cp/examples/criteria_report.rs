//! Validity criteria for a three-level particle near a gold sphere.

use std::sync::Arc;

use nalgebra::Vector3;
use num_complex::Complex64;
use thermal_cp::born_solver::{voxelize, GammaSolver, Kernel, Method, Shape, SolverOptions};
use thermal_cp::criteria::{criteria_report, effective_extent, Thresholds};
use thermal_cp::materials::Material;
use thermal_cp::thermal::{Particle, SolverGamma, Transition};

fn main() -> thermal_cp::Result<()> {
    let body = Arc::new(voxelize(&Shape::Sphere { radius: 1000.0 }, 12, Material::gold())?);
    let solver = Arc::new(GammaSolver::new(body.clone(), SolverOptions::default()));
    let r = Vector3::new(0.0, 0.0, 1500.0);
    let nonret = SolverGamma::new(solver.clone(), r, Kernel::Nonretarded, Method::DirectSolve)?;
    let z = effective_extent(&body, &r, &solver.strengths(Complex64::new(0.0, 0.0))?, 0.01)?;
    let p = Particle::new(
        "three-level",
        vec![Transition::isotropic(2.0, 4.0), Transition::isotropic(0.05, 1.0), Transition::isotropic(0.002, 0.5)],
    )?;
    let report = criteria_report(&p, &nonret, z, 300.0, Some(1e4), Thresholds::default())?;
    for (k, v) in report.key_values() {
        println!("{k} = {v}");
    }
    Ok(())
}
