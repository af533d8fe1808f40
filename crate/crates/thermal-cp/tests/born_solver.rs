use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use num_complex::Complex64;
use proptest::prelude::*;
use thermal_cp::born_solver::{
    voxelize, Discretization, GammaSolver, Kernel, Method, Shape, SolverOptions, VoxelBody,
};
use thermal_cp::closed_forms::{plate_gamma0, sphere_trace_gamma0};
use thermal_cp::materials::Material;
use thermal_cp::units::HBAR_C;
use thermal_cp::Error;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

fn collocation() -> SolverOptions {
    SolverOptions {
        discretization: Discretization::Collocation,
        ..Default::default()
    }
}

fn lattice(cells: &[[i64; 3]], d: f64) -> VoxelBody {
    let list = cells.iter().map(|&i| (i, d * d * d, 0)).collect();
    VoxelBody::from_lattice("test", d, Vector3::zeros(), list, vec![Material::PerfectConductor]).unwrap()
}

/// −(I − 3ee)/(4πρ³), written out independently of the library.
fn dipole(rho: Vector3<f64>) -> Matrix3<f64> {
    let r = rho.norm();
    let e = rho / r;
    (3.0 * e * e.transpose() - Matrix3::identity()) / (4.0 * PI * r.powi(3))
}

/// Dense static collocation: E_i = A(s_i − r) + Σ_{j≠i} A(s_i − s_j) c_j E_j,
/// Γ = Σ_i A(r − s_i) c_i E_i.
fn static_oracle(body: &VoxelBody, r: Vector3<f64>, u: f64) -> Matrix3<f64> {
    let n = body.len();
    let mut m = DMatrix::<f64>::identity(3 * n, 3 * n);
    for (i, a) in body.cells.iter().enumerate() {
        for (j, b) in body.cells.iter().enumerate() {
            if i != j {
                let blk = -dipole(a.center - b.center) * (u * b.volume);
                m.view_mut((3 * i, 3 * j), (3, 3)).copy_from(&blk);
            }
        }
    }
    let lu = m.lu();
    let mut gamma = Matrix3::zeros();
    for col in 0..3 {
        let mut rhs = DVector::<f64>::zeros(3 * n);
        for (i, c) in body.cells.iter().enumerate() {
            rhs.rows_mut(3 * i, 3).copy_from(&dipole(c.center - r).column(col));
        }
        let e = lu.solve(&rhs).unwrap();
        for (i, c) in body.cells.iter().enumerate() {
            let ei = e.fixed_rows::<3>(3 * i).into_owned();
            let g = dipole(r - c.center) * ei * (u * c.volume);
            gamma.column_mut(col).add_assign(&g);
        }
    }
    gamma
}

trait AddAssign {
    fn add_assign(&mut self, v: &Vector3<f64>);
}

impl AddAssign for nalgebra::MatrixViewMut<'_, f64, nalgebra::U3, nalgebra::U1, nalgebra::U1, nalgebra::U3> {
    fn add_assign(&mut self, v: &Vector3<f64>) {
        for k in 0..3 {
            self[k] += v[k];
        }
    }
}

#[test]
fn single_voxel_static() {
    let d = 2.0;
    let body = lattice(&[[0, 0, 0]], d);
    let solver = GammaSolver::new(Arc::new(body), collocation());
    let r = Vector3::new(0.0, 0.0, 20.0);
    let g = solver.gamma_with(&r, ZERO, &[Complex64::new(0.5, 0.0)], Method::DirectSolve).unwrap();
    // c A A with c = uV; A² = diag(1, 1, 4)/(4πρ³)²
    let c = 0.5 * d * d * d;
    let want = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 4.0)) * c / (16.0 * PI * PI * 20f64.powi(6));
    assert!((g.map(|v| v.re) - want).norm() < 1e-14 * want.norm());
}

#[test]
fn distant_cell_retardation_curvature() {
    // Re Tr[A(k)A(k)]/Tr[A₀A₀] = 1 + (kρ)²/3 for one small cell
    let body = lattice(&[[0, 0, 0]], 1.0);
    let solver = GammaSolver::new(Arc::new(body), collocation());
    let rho = 200.0;
    let r = Vector3::new(0.0, rho * 0.6, rho * 0.8);
    let (g0, g2) = solver.gamma_frequency_derivatives(&r).unwrap();
    let want = g0.trace() * 2.0 * rho * rho / (3.0 * HBAR_C * HBAR_C);
    assert!((g2.trace() / want - 1.0).abs() < 1e-3, "{} {want}", g2.trace());
}

#[test]
fn born_series_matches_direct_solve_for_weak_response() {
    let body = voxelize(&Shape::Sphere { radius: 50.0 }, 6, Material::PerfectConductor).unwrap();
    let solver = GammaSolver::new(Arc::new(body), collocation());
    let r = Vector3::new(10.0, 0.0, 80.0);
    let u = [Complex64::new(0.5, 0.0)];
    for k in [ZERO, Complex64::new(0.01, 0.0), Complex64::new(0.0, 0.02)] {
        let a = solver.gamma_with(&r, k, &u, Method::DirectSolve).unwrap();
        let b = solver.gamma_with(&r, k, &u, Method::BornSeries { n_max: 200 }).unwrap();
        assert!((a - b).norm() < 1e-8 * a.norm(), "k = {k}");
    }
}

#[test]
fn born_series_reports_divergence_for_conductors() {
    let body = voxelize(&Shape::Sphere { radius: 50.0 }, 8, Material::PerfectConductor).unwrap();
    let solver = GammaSolver::new(Arc::new(body), SolverOptions::default());
    let r = Vector3::new(0.0, 0.0, 60.0);
    let e = solver
        .gamma_with(&r, ZERO, &[Complex64::new(3.0, 0.0)], Method::BornSeries { n_max: 40 })
        .unwrap_err();
    assert!(matches!(e, Error::BornDivergent { .. }), "{e}");
}

#[test]
fn symmetry_blocks_reproduce_full_solve() {
    let body = Arc::new(voxelize(&Shape::Sphere { radius: 100.0 }, 8, Material::gold()).unwrap());
    let full = GammaSolver::new(
        body.clone(),
        SolverOptions {
            use_symmetry: false,
            ..Default::default()
        },
    );
    let reduced = GammaSolver::new(body, SolverOptions::default());
    let w = Complex64::new(0.3, 0.0);
    for r in [Vector3::new(0.0, 0.0, 150.0), Vector3::new(0.0, 40.0, 130.0)] {
        let a = full.gamma(&r, w, Kernel::Retarded, Method::DirectSolve).unwrap().value;
        let b = reduced.gamma(&r, w, Kernel::Retarded, Method::DirectSolve).unwrap().value;
        assert!((a - b).norm() < 1e-10 * a.norm());
    }
}

#[test]
fn gamma_is_symmetric() {
    let body = voxelize(&Shape::Sphere { radius: 100.0 }, 8, Material::gold()).unwrap();
    let solver = GammaSolver::new(Arc::new(body), SolverOptions::default());
    let r = Vector3::new(37.0, -52.0, 121.0);
    for (w, kernel) in [
        (Complex64::new(0.5, 0.0), Kernel::Retarded),
        (Complex64::new(0.0, 0.8), Kernel::Retarded),
        (Complex64::new(0.5, 0.0), Kernel::Nonretarded),
    ] {
        let g = solver.gamma(&r, w, kernel, Method::DirectSolve).unwrap();
        assert!(g.asymmetry() < 1e-8, "{w} {kernel:?}: {}", g.asymmetry());
    }
}

#[test]
fn sphere_trace_within_five_percent() {
    let body = voxelize(&Shape::Sphere { radius: 1000.0 }, 16, Material::PerfectConductor).unwrap();
    let solver = GammaSolver::new(Arc::new(body), SolverOptions::default());
    let g = solver.gamma0(&Vector3::new(0.0, 0.0, 2000.0)).unwrap();
    let exact = sphere_trace_gamma0(2000.0, 1000.0).unwrap();
    assert!((g.trace() / exact - 1.0).abs() < 0.05);
}

#[test]
fn slab_reproduces_plate_image_within_five_percent() {
    // six cells thick, ten distances wide, point three cells above the face
    let body = voxelize(
        &Shape::Slab {
            thickness: 200.0,
            lateral: 1000.0,
        },
        30,
        Material::PerfectConductor,
    )
    .unwrap();
    let solver = GammaSolver::new(Arc::new(body), SolverOptions::default());
    let g = solver.gamma0(&Vector3::new(0.0, 0.0, 100.0)).unwrap();
    let want = plate_gamma0(100.0).unwrap().real();
    for a in 0..3 {
        assert!((g[(a, a)] / want[(a, a)] - 1.0).abs() < 0.05, "{a}: {}", g[(a, a)] / want[(a, a)]);
    }
}

#[test]
fn static_limit_of_retarded_kernel() {
    let body = voxelize(&Shape::Sphere { radius: 100.0 }, 8, Material::PerfectConductor).unwrap();
    let solver = GammaSolver::new(Arc::new(body), SolverOptions::default());
    let r = Vector3::new(0.0, 0.0, 180.0);
    let g0 = solver.gamma0(&r).unwrap();
    let w = 1e-4;
    let g = solver.gamma(&r, Complex64::new(w, 0.0), Kernel::Retarded, Method::DirectSolve).unwrap();
    // deviations are O((kρ)²) with ρ at most r + R
    let kr = w / HBAR_C * 280.0;
    assert!((g.real() - g0).norm() < kr * kr * g0.norm());
    assert!((g.real() - g0).norm() > 0.0);
}

#[test]
fn point_inside_a_cell_is_rejected() {
    let body = lattice(&[[0, 0, 0]], 2.0);
    let solver = GammaSolver::new(Arc::new(body), collocation());
    let e = solver
        .gamma_with(&Vector3::new(0.5, 0.0, 0.0), ZERO, &[Complex64::new(1.0, 0.0)], Method::DirectSolve)
        .unwrap_err();
    assert!(matches!(e, Error::Validation(_)));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn collocation_matches_dense_oracle(
        cells in prop::collection::btree_set((0i64..4, 0i64..4, 0i64..3), 1..8),
        u in 0.1f64..3.0,
        height in 4.0f64..12.0,
    ) {
        let idx: Vec<[i64; 3]> = cells.into_iter().map(|(a, b, c)| [a, b, c]).collect();
        let body = lattice(&idx, 1.0);
        let r = Vector3::new(1.3, 0.7, height);
        let want = static_oracle(&body, r, u);
        let solver = GammaSolver::new(Arc::new(body), collocation());
        let got = solver.gamma_with(&r, ZERO, &[Complex64::new(u, 0.0)], Method::DirectSolve).unwrap();
        prop_assert!((got.map(|v| v.re) - want).norm() < 1e-10 * want.norm());
    }

    #[test]
    fn static_gamma_scales_as_inverse_cube(scale in 0.1f64..50.0) {
        let shape = |s: f64| Shape::Sphere { radius: 100.0 * s };
        let a = GammaSolver::new(Arc::new(voxelize(&shape(1.0), 8, Material::PerfectConductor).unwrap()), SolverOptions::default());
        let b = GammaSolver::new(Arc::new(voxelize(&shape(scale), 8, Material::PerfectConductor).unwrap()), SolverOptions::default());
        let r = Vector3::new(0.0, 20.0, 170.0);
        let ga = a.gamma0(&r).unwrap();
        let gb = b.gamma0(&(r * scale)).unwrap() * scale.powi(3);
        prop_assert!((ga - gb).norm() < 1e-8 * ga.norm());
    }
}
