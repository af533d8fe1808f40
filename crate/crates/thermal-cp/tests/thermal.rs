use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use thermal_cp::born_solver::{voxelize, GammaSolver, Kernel, Method, Shape, SolverOptions};
use thermal_cp::materials::Material;
use thermal_cp::numerics::photon_number;
use thermal_cp::thermal::{
    linear_t_correction, nonresonant_potential, polarizability, resonant_potential, retardation_correction,
    temperature_independent_potential, total_potential, Dipole, FlatGamma, GammaProvider, Particle, SolverGamma,
    ThermalContext, Transition,
};
use thermal_cp::units::{thermal_energy, DEBYE2_PER_EPS0};

fn pec_sphere_gamma(kernel: Kernel) -> SolverGamma {
    let body = voxelize(&Shape::Sphere { radius: 500.0 }, 8, Material::PerfectConductor).unwrap();
    let solver = Arc::new(GammaSolver::new(Arc::new(body), SolverOptions::default()));
    SolverGamma::new(solver, Vector3::new(0.0, 0.0, 800.0), kernel, Method::DirectSolve).unwrap()
}

#[test]
fn multilevel_cancellation_near_a_voxel_sphere() {
    let gamma = pec_sphere_gamma(Kernel::Nonretarded);
    let p = Particle::new(
        "three-level",
        vec![Transition::isotropic(0.3, 2.0), Transition::isotropic(-0.01, 1.0), Transition::isotropic(1.5, 0.5)],
    )
    .unwrap();
    let u0 = temperature_independent_potential(&p, &gamma.gamma0().unwrap());
    for t in [4.0, 77.0, 300.0, 600.0] {
        let u = total_potential(&p, &gamma, &ThermalContext::new(t)).unwrap();
        assert!((u.total / u0 - 1.0).abs() < 1e-6, "T {t}: {}", u.total / u0 - 1.0);
    }
    // every ω hits one memoised solve for a PEC body with the static kernel
    assert_eq!(gamma.memo_len(), 1);
}

#[test]
fn nonretarded_pec_has_no_linear_correction() {
    let gamma = pec_sphere_gamma(Kernel::Nonretarded);
    let p = Particle::two_level(0.1, 1.0).unwrap();
    assert_eq!(linear_t_correction(&p, &gamma, 300.0).unwrap(), 0.0);
}

#[test]
fn excited_state_resonant_part_at_zero_temperature() {
    // U_r(T = 0) = −d·ReΓ_{|ω|}·d for an excited two-level particle
    let g = FlatGamma::isotropic(3e-7);
    let p = Particle::two_level(-0.2, 1.5).unwrap();
    let ur = resonant_potential(&p, &g, &ThermalContext::new(0.0)).unwrap();
    assert!((ur / (-1.5 * 1e-7 * DEBYE2_PER_EPS0) - 1.0).abs() < 1e-14);
}

#[test]
fn polarizability_static_limit() {
    // α(0) = 2 Σ d²/ħω
    let p = Particle::two_level(0.4, 3.0).unwrap();
    let a = polarizability(&p, 0.0);
    assert!((a[(0, 0)] - 2.0 * 1.0 / 0.4).abs() < 1e-14);
    assert_eq!(a[(0, 1)], 0.0);
}

#[test]
fn retardation_correction_formula() {
    let g2 = Matrix3::identity() * 2e-9;
    let p = Particle::two_level(0.01, 3.0).unwrap();
    let got = retardation_correction(&p, &g2, 300.0);
    // isotropic: d·Γ''·d = (d²/3)·Tr Γ'' = 6e-9
    let want = 0.5 * thermal_energy(300.0) * 0.01 * 6e-9 * DEBYE2_PER_EPS0;
    assert!((got / want - 1.0).abs() < 1e-14, "{got} {want}");
}

#[test]
fn invalid_particles_are_rejected() {
    assert!(Particle::two_level(0.0, 1.0).is_err());
    assert!(Particle::two_level(0.1, -1.0).is_err());
    assert!(Particle::new("empty", vec![]).is_err());
    assert!(ThermalContext::new(-1.0).validate().is_err());
}

fn dyad() -> impl Strategy<Value = Matrix3<f64>> {
    prop::array::uniform3(-2.0f64..2.0).prop_map(|v| {
        let d = Vector3::from(v);
        d * d.transpose()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn exact_cancellation_for_flat_gamma(
        t in 0.0f64..1000.0,
        w in prop_oneof![1e-3f64..1.0, -1.0f64..-1e-3],
        d in dyad(),
        g in prop::array::uniform3(1e-9f64..1e-5),
    ) {
        prop_assume!(d.trace() > 1e-6);
        let gamma = FlatGamma::new(Matrix3::from_diagonal(&Vector3::from(g)));
        let p = Particle::new("p", vec![Transition { omega_ev: w, dipole: Dipole::Dyad(d) }]).unwrap();
        let u = total_potential(&p, &gamma, &ThermalContext::new(t)).unwrap();
        let u0 = temperature_independent_potential(&p, &gamma.gamma0);
        prop_assert!((u.total / u0 - 1.0).abs() < 1e-6, "{}", u.total / u0 - 1.0);
    }

    #[test]
    fn nonresonant_part_is_the_coth_form(t in 1.0f64..1000.0, w in 1e-3f64..1.0) {
        let gamma = FlatGamma::isotropic(1e-6);
        let p = Particle::two_level(w, 1.0).unwrap();
        let unr = nonresonant_potential(&p, &gamma, &ThermalContext::new(t)).unwrap();
        let n = photon_number(w, t).unwrap();
        let want = -(n + 0.5) * 1e-6 / 3.0 * DEBYE2_PER_EPS0;
        prop_assert!((unr / want - 1.0).abs() < 1e-6);
    }

    #[test]
    fn u0_ignores_the_sign_of_transitions(w in 1e-3f64..1.0, d2 in 0.1f64..10.0) {
        let g = Matrix3::from_diagonal(&Vector3::new(1.0, 2.0, 3.0));
        let p = Particle::two_level(w, d2).unwrap();
        prop_assert_eq!(
            temperature_independent_potential(&p, &g),
            temperature_independent_potential(&p.flipped(), &g)
        );
    }
}
