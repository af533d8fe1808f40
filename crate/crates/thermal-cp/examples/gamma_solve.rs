//! Scattering Green tensor of a PEC sphere against the closed form.

use std::sync::Arc;

use nalgebra::Vector3;
use num_complex::Complex64;
use thermal_cp::born_solver::{voxelize, GammaSolver, Kernel, Method, Shape, SolverOptions};
use thermal_cp::closed_forms::sphere_trace_gamma0;
use thermal_cp::materials::Material;

fn main() -> thermal_cp::Result<()> {
    let radius = 1000.0;
    let body = voxelize(&Shape::Sphere { radius }, 16, Material::PerfectConductor)?;
    println!("{} cells", body.len());
    let solver = GammaSolver::new(Arc::new(body), SolverOptions::default());
    for ratio in [2.0, 3.0, 4.0] {
        let r = Vector3::new(0.0, 0.0, ratio * radius);
        let g0 = solver.gamma0(&r)?;
        let exact = sphere_trace_gamma0(ratio * radius, radius)?;
        println!("r/R = {ratio}: Tr Γ₀ = {:.6e}, closed form {exact:.6e}, error {:+.2}%", g0.trace(), 100.0 * (g0.trace() / exact - 1.0));
    }
    // one retarded solve at kr = 0.5
    let r = Vector3::new(0.0, 0.0, 2.0 * radius);
    let w = Complex64::new(0.5 * 197.3269804 / (2.0 * radius), 0.0);
    let g = solver.gamma(&r, w, Kernel::Retarded, Method::DirectSolve)?;
    println!("retarded Tr Γ at kr = 0.5: {:.6e}, asymmetry {:.1e}", g.trace(), g.asymmetry());
    Ok(())
}
