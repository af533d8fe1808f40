//! Scattering Green tensor Γ_ω(r) of voxelized bodies.

pub mod cube;
pub mod kernel;
pub mod solver;
pub mod voxel;

use std::sync::Arc;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::materials::born_strength;
use crate::units::HBAR_C;
use crate::{Error, Result};

pub use kernel::{kernel_a, static_kernel, Kernel};
pub use solver::{symmetry_reduction, Discretization, GammaSolver, Method, Reduction, SolverOptions};
pub use voxel::{voxelize, voxelize_with, Cell, CellVolumes, Shape, VoxelBody, VoxelOptions};

/// One sample Γ_ω(r) in nm⁻³.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaTensor {
    pub value: Matrix3<Complex64>,
    /// Complex photon energy ħω in eV.
    pub frequency: Complex64,
    pub point: Vector3<f64>,
    pub kernel: Kernel,
}

impl GammaTensor {
    pub fn real(&self) -> Matrix3<f64> {
        self.value.map(|v| v.re)
    }

    pub fn trace(&self) -> Complex64 {
        self.value.trace()
    }

    /// ‖Γ − Γᵀ‖/‖Γ‖ (Frobenius).
    pub fn asymmetry(&self) -> f64 {
        let n = self.value.norm();
        if n == 0.0 {
            0.0
        } else {
            (self.value - self.value.transpose()).norm() / n
        }
    }
}

/// Wavenumber k = ω/c in nm⁻¹ used by the kernel model.
pub fn kernel_wavenumber(omega: Complex64, kernel: Kernel) -> Complex64 {
    match kernel {
        Kernel::Retarded => omega / HBAR_C,
        Kernel::Nonretarded => Complex64::new(0.0, 0.0),
    }
}

impl GammaSolver {
    /// Born strengths of every body material at ħω.
    pub fn strengths(&self, omega: Complex64) -> Result<Vec<Complex64>> {
        self.body().materials.iter().map(|m| born_strength(m, omega)).collect()
    }

    /// Γ_ω(r) with material response evaluated at ω.
    pub fn gamma(&self, r: &Vector3<f64>, omega: Complex64, kernel: Kernel, method: Method) -> Result<GammaTensor> {
        let u = self.strengths(omega)?;
        let value = self.gamma_with(r, kernel_wavenumber(omega, kernel), &u, method)?;
        Ok(GammaTensor {
            value,
            frequency: omega,
            point: *r,
            kernel,
        })
    }

    /// Static Γ₀(r) (ω → 0, static kernel), real.
    pub fn gamma0(&self, r: &Vector3<f64>) -> Result<Matrix3<f64>> {
        let u = self.strengths(Complex64::new(0.0, 0.0))?;
        Ok(self
            .gamma_with(r, Complex64::new(0.0, 0.0), &u, Method::DirectSolve)?
            .map(|v| v.re))
    }

    /// Γ₀ and the second ω-derivative Γ₀'' (nm⁻³ eV⁻²) of the retarded Γ_ω
    /// with the material response frozen at ω = 0.
    ///
    /// Central differences at steps h, h/2, h/4, h/8 with h chosen so that
    /// h·ρ_max/ħc = 10⁻³, followed by Richardson extrapolation in h².
    pub fn gamma_frequency_derivatives(&self, r: &Vector3<f64>) -> Result<(Matrix3<f64>, Matrix3<f64>)> {
        let u = self.strengths(Complex64::new(0.0, 0.0))?;
        let zero = Complex64::new(0.0, 0.0);
        let g0 = self.gamma_with(r, zero, &u, Method::DirectSolve)?;
        let rho_max = self
            .body()
            .cells
            .iter()
            .map(|c| (c.center - r).norm())
            .fold(0.0, f64::max)
            .max(self.body().spacing);
        let h0 = 1e-3 * HBAR_C / rho_max;
        let mut levels: Vec<Matrix3<f64>> = Vec::new();
        for level in 0..4 {
            let h = h0 / f64::powi(2.0, level);
            let k = Complex64::new(h / HBAR_C, 0.0);
            let plus = self.gamma_with(r, k, &u, Method::DirectSolve)?;
            let minus = self.gamma_with(r, -k, &u, Method::DirectSolve)?;
            let second = (plus + minus - g0 * Complex64::new(2.0, 0.0)) / Complex64::new(h * h, 0.0);
            let re = second.map(|v| v.re);
            let im = second.map(|v| v.im).norm();
            if im > 1e-6 * re.norm().max(f64::MIN_POSITIVE) {
                return Err(Error::NonConvergence {
                    message: format!("Γ'' has an imaginary residue {im:e}"),
                    best: re.norm(),
                });
            }
            levels.push(re);
        }
        // Richardson in h²: columns of the Neville table
        let mut table = levels.clone();
        let mut factor = 4.0;
        let mut last_change = f64::INFINITY;
        for _ in 1..table.len() {
            let next: Vec<Matrix3<f64>> = table
                .windows(2)
                .map(|w| (w[1] * factor - w[0]) / (factor - 1.0))
                .collect();
            if next.len() >= 2 {
                last_change = (next[next.len() - 1] - next[next.len() - 2]).norm();
            }
            table = next;
            factor *= 4.0;
        }
        let result = table[0];
        let scale = result.norm().max(levels[3].norm());
        let spread = (levels[3] - levels[2]).norm();
        if !(last_change.min(spread) <= 1e-3 * scale) {
            return Err(Error::NonConvergence {
                message: "Richardson sequence for Γ'' did not settle; adjust the step".into(),
                best: result.norm(),
            });
        }
        Ok((g0.map(|v| v.re), result))
    }
}

/// Γ_ω(r) for a body, building a solver with default options.
pub fn scattering_gamma(
    body: &VoxelBody,
    r: &Vector3<f64>,
    omega: Complex64,
    method: Method,
    kernel: Kernel,
) -> Result<GammaTensor> {
    GammaSolver::new(Arc::new(body.clone()), SolverOptions::default()).gamma(r, omega, kernel, method)
}

/// Γ₀ and Γ₀'' for a body, building a solver with default options.
pub fn gamma_frequency_derivatives(body: &VoxelBody, r: &Vector3<f64>) -> Result<(Matrix3<f64>, Matrix3<f64>)> {
    GammaSolver::new(Arc::new(body.clone()), SolverOptions::default()).gamma_frequency_derivatives(r)
}
