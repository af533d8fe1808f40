//! Exact thermal potential against U₀ near a PEC sphere.

use std::sync::Arc;

use nalgebra::Vector3;
use thermal_cp::born_solver::{voxelize, GammaSolver, Kernel, Method, Shape, SolverOptions};
use thermal_cp::materials::Material;
use thermal_cp::thermal::{temperature_independent_potential, total_potential, GammaProvider, Particle, SolverGamma, ThermalContext};

fn main() -> thermal_cp::Result<()> {
    let body = voxelize(&Shape::Sphere { radius: 1000.0 }, 16, Material::PerfectConductor)?;
    let solver = Arc::new(GammaSolver::new(Arc::new(body), SolverOptions::default()));
    let gamma = SolverGamma::new(solver, Vector3::new(0.0, 0.0, 2000.0), Kernel::Nonretarded, Method::DirectSolve)?;
    for p in [Particle::two_level(0.05, 1.0)?, Particle::two_level(-0.05, 1.0)?] {
        let u0 = temperature_independent_potential(&p, &gamma.gamma0()?);
        println!("ħω_kn = {:+} eV, U₀ = {u0:.9e} eV", p.transitions[0].omega_ev);
        for t in [0.0, 4.0, 77.0, 300.0, 600.0] {
            let u = total_potential(&p, &gamma, &ThermalContext::new(t))?;
            println!(
                "  T = {t:>5} K: U_nr = {:+.6e}  U_r = {:+.6e}  U/U₀ − 1 = {:+.1e}",
                u.nonresonant,
                u.resonant,
                u.total / u0 - 1.0
            );
        }
    }
    Ok(())
}
