//! Thermal Casimir–Polder potentials of particles in energy eigenstates.
//!
//! Energies are in eV, dipole dyads in Debye² and Γ in nm⁻³. Polarizabilities
//! carry units of Debye²/eV, so every potential is a product with
//! [`DEBYE2_PER_EPS0`].

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::born_solver::{kernel_wavenumber, GammaSolver, Kernel, Method};
use crate::numerics::{
    integrate_semi_infinite, matsubara_sum, photon_number, MatsubaraPolicy, QuadratureSpec,
};
use crate::units::{thermal_energy, DEBYE2_PER_EPS0};
use crate::{Error, Result};

/// Dipole matrix element of one transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dipole {
    /// |d|² in Debye² for an isotropic particle.
    Isotropic(f64),
    /// The dyad d_nk ⊗ d_kn in Debye² (real symmetric).
    Dyad(Matrix3<f64>),
}

impl Dipole {
    /// The dyad, with |d|²·I/3 for isotropic particles.
    pub fn dyad(&self) -> Matrix3<f64> {
        match *self {
            Dipole::Isotropic(d2) => Matrix3::identity() * (d2 / 3.0),
            Dipole::Dyad(m) => m,
        }
    }

    /// |d|² in Debye².
    pub fn strength(&self) -> f64 {
        match *self {
            Dipole::Isotropic(d2) => d2,
            Dipole::Dyad(m) => m.trace(),
        }
    }

    /// d·Γ·d with the real part of Γ.
    pub fn contract(&self, gamma: &Matrix3<f64>) -> f64 {
        self.dyad().component_mul(gamma).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    /// Signed transition energy ħω_kn = E_k − E_n in eV.
    pub omega_ev: f64,
    pub dipole: Dipole,
}

impl Transition {
    pub fn isotropic(omega_ev: f64, d2_debye2: f64) -> Self {
        Transition {
            omega_ev,
            dipole: Dipole::Isotropic(d2_debye2),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega_ev == 0.0 || !self.omega_ev.is_finite() {
            return Err(Error::validation("transition energy must be finite and nonzero"));
        }
        match self.dipole {
            Dipole::Isotropic(d2) if !(d2 >= 0.0) => {
                Err(Error::validation(format!("|d|² must be non-negative, got {d2}")))
            }
            Dipole::Dyad(m) => {
                let scale = m.norm().max(f64::MIN_POSITIVE);
                if (m - m.transpose()).norm() > 1e-12 * scale {
                    return Err(Error::validation("dipole dyad must be symmetric"));
                }
                let eig = m.symmetric_eigenvalues();
                if eig.iter().any(|&e| e < -1e-12 * scale) {
                    return Err(Error::validation("dipole dyad must be positive semidefinite"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Particle {
    pub label: String,
    pub transitions: Vec<Transition>,
}

impl Particle {
    pub fn new(label: impl Into<String>, transitions: Vec<Transition>) -> Result<Self> {
        let p = Particle {
            label: label.into(),
            transitions,
        };
        p.validate()?;
        Ok(p)
    }

    /// Two-level particle in its ground (ħω > 0) or excited (ħω < 0) state.
    pub fn two_level(omega_ev: f64, d2_debye2: f64) -> Result<Self> {
        let label = if omega_ev > 0.0 { "ground" } else { "excited" };
        Particle::new(label, vec![Transition::isotropic(omega_ev, d2_debye2)])
    }

    pub fn validate(&self) -> Result<()> {
        if self.transitions.is_empty() {
            return Err(Error::validation("particle needs at least one transition"));
        }
        self.transitions.iter().try_for_each(Transition::validate)
    }

    /// Copy with every transition energy negated.
    pub fn flipped(&self) -> Self {
        Particle {
            label: format!("{}-flipped", self.label),
            transitions: self
                .transitions
                .iter()
                .map(|t| Transition {
                    omega_ev: -t.omega_ev,
                    ..*t
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ThermalContext {
    /// Temperature in K; zero selects the imaginary-frequency integral.
    pub temperature: f64,
    pub matsubara: MatsubaraPolicy,
    pub quadrature: QuadratureSpec,
}

impl ThermalContext {
    pub fn new(temperature: f64) -> Self {
        ThermalContext {
            temperature,
            matsubara: MatsubaraPolicy::default(),
            quadrature: QuadratureSpec::new(crate::numerics::Scheme::GaussKronrod, 1e-8),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.temperature >= 0.0) || !self.temperature.is_finite() {
            return Err(Error::validation(format!("temperature must be ≥ 0, got {}", self.temperature)));
        }
        self.matsubara.validate()
    }
}

/// Γ_ω(r) at one evaluation point, as a function of complex ħω.
pub trait GammaProvider: Send + Sync {
    fn gamma(&self, omega: Complex64) -> Result<Matrix3<Complex64>>;

    /// Static Γ₀ (ω → 0 with the static kernel).
    fn gamma0(&self) -> Result<Matrix3<f64>>;

    fn label(&self) -> String;
}

/// A frequency-independent Γ, as for perfect conductors in the
/// nonretarded limit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlatGamma {
    pub gamma0: Matrix3<f64>,
}

impl FlatGamma {
    pub fn new(gamma0: Matrix3<f64>) -> Self {
        FlatGamma { gamma0 }
    }

    /// Tr Γ₀·I/3; exact for potentials of isotropic particles.
    pub fn isotropic(trace: f64) -> Self {
        FlatGamma {
            gamma0: Matrix3::identity() * (trace / 3.0),
        }
    }
}

impl GammaProvider for FlatGamma {
    fn gamma(&self, _omega: Complex64) -> Result<Matrix3<Complex64>> {
        Ok(self.gamma0.map(|v| Complex64::new(v, 0.0)))
    }

    fn gamma0(&self) -> Result<Matrix3<f64>> {
        Ok(self.gamma0)
    }

    fn label(&self) -> String {
        "flat".into()
    }
}

/// Solver-backed Γ at a fixed point, memoised on the (k, u) pair that
/// determines the linear system.
pub struct SolverGamma {
    solver: Arc<GammaSolver>,
    point: Vector3<f64>,
    kernel: Kernel,
    method: Method,
    memo: Mutex<HashMap<Vec<u64>, Matrix3<Complex64>>>,
}

impl SolverGamma {
    pub fn new(solver: Arc<GammaSolver>, point: Vector3<f64>, kernel: Kernel, method: Method) -> Result<Self> {
        solver.body().check_outside(&point)?;
        Ok(SolverGamma {
            solver,
            point,
            kernel,
            method,
            memo: Mutex::new(HashMap::new()),
        })
    }

    pub fn kernel(&self) -> Kernel {
        self.kernel
    }

    pub fn point(&self) -> Vector3<f64> {
        self.point
    }

    pub fn solver(&self) -> &Arc<GammaSolver> {
        &self.solver
    }

    /// Number of distinct systems solved so far.
    pub fn memo_len(&self) -> usize {
        self.memo.lock().expect("memo lock").len()
    }

    fn evaluate(&self, k: Complex64, u: &[Complex64]) -> Result<Matrix3<Complex64>> {
        let mut key = vec![k.re.to_bits(), k.im.to_bits()];
        key.extend(u.iter().flat_map(|v| [v.re.to_bits(), v.im.to_bits()]));
        if let Some(g) = self.memo.lock().expect("memo lock").get(&key) {
            return Ok(*g);
        }
        let g = self.solver.gamma_with(&self.point, k, u, self.method)?;
        self.memo.lock().expect("memo lock").insert(key, g);
        Ok(g)
    }
}

impl GammaProvider for SolverGamma {
    fn gamma(&self, omega: Complex64) -> Result<Matrix3<Complex64>> {
        let u = self.solver.strengths(omega)?;
        self.evaluate(kernel_wavenumber(omega, self.kernel), &u)
    }

    fn gamma0(&self) -> Result<Matrix3<f64>> {
        let u = self.solver.strengths(Complex64::new(0.0, 0.0))?;
        Ok(self.evaluate(Complex64::new(0.0, 0.0), &u)?.map(|v| v.re))
    }

    fn label(&self) -> String {
        format!("solver:{}:{}", self.solver.body().hash(), self.kernel.tag())
    }
}

fn real(g: &Matrix3<Complex64>) -> Matrix3<f64> {
    g.map(|v| v.re)
}

/// α(iξ) = 2Σ_k ħω_kn d⊗d/((ħω_kn)² + (ħξ)²) in Debye²/eV.
pub fn polarizability(p: &Particle, xi_ev: f64) -> Matrix3<f64> {
    p.transitions
        .iter()
        .map(|t| t.dipole.dyad() * (2.0 * t.omega_ev / (t.omega_ev * t.omega_ev + xi_ev * xi_ev)))
        .sum()
}

fn alpha_gamma(p: &Particle, gamma: &dyn GammaProvider, xi_ev: f64) -> Result<f64> {
    let g = real(&gamma.gamma(Complex64::new(0.0, xi_ev))?);
    Ok(polarizability(p, xi_ev).component_mul(&g).sum())
}

/// Nonresonant potential: the Matsubara sum, or its integral at T = 0.
pub fn nonresonant_potential(p: &Particle, gamma: &dyn GammaProvider, ctx: &ThermalContext) -> Result<f64> {
    ctx.validate()?;
    if ctx.temperature == 0.0 {
        // ħξ = ω_s·s with ω_s the smallest transition energy
        let scale = p
            .transitions
            .iter()
            .map(|t| t.omega_ev.abs())
            .fold(f64::INFINITY, f64::min);
        let mut failure = None;
        let integral = integrate_semi_infinite(
            |s| match alpha_gamma(p, gamma, scale * s) {
                Ok(v) => v,
                Err(e) => {
                    failure.get_or_insert(e);
                    0.0
                }
            },
            &ctx.quadrature,
        )?;
        if let Some(e) = failure {
            return Err(e);
        }
        return Ok(-scale * integral.value / (2.0 * std::f64::consts::PI) * DEBYE2_PER_EPS0);
    }
    let gamma0 = gamma.gamma0()?;
    let sum = matsubara_sum(ctx.temperature, &ctx.matsubara, |j, xi| {
        if j == 0 {
            Ok(polarizability(p, 0.0).component_mul(&gamma0).sum())
        } else {
            alpha_gamma(p, gamma, xi)
        }
    })?;
    Ok(-thermal_energy(ctx.temperature) * sum.value * DEBYE2_PER_EPS0)
}

/// Resonant potential Σ_k n(ω_kn)·d·Re Γ_{ω_kn}·d.
pub fn resonant_potential(p: &Particle, gamma: &dyn GammaProvider, ctx: &ThermalContext) -> Result<f64> {
    ctx.validate()?;
    let mut total = 0.0;
    for t in &p.transitions {
        let n = photon_number(t.omega_ev, ctx.temperature)?;
        if n == 0.0 {
            continue;
        }
        // Re Γ is even in ω, so downward transitions use |ω|
        let g = real(&gamma.gamma(Complex64::new(t.omega_ev.abs(), 0.0))?);
        total += n * t.dipole.contract(&g);
    }
    Ok(total * DEBYE2_PER_EPS0)
}

/// U₀ = −½Σ_k d·Γ₀·d, independent of temperature and of the signs of ω_kn.
pub fn temperature_independent_potential(p: &Particle, gamma0: &Matrix3<f64>) -> f64 {
    -0.5 * p.transitions.iter().map(|t| t.dipole.contract(gamma0)).sum::<f64>() * DEBYE2_PER_EPS0
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Potential {
    pub total: f64,
    pub nonresonant: f64,
    pub resonant: f64,
}

pub fn total_potential(p: &Particle, gamma: &dyn GammaProvider, ctx: &ThermalContext) -> Result<Potential> {
    let nonresonant = nonresonant_potential(p, gamma, ctx)?;
    let resonant = resonant_potential(p, gamma, ctx)?;
    Ok(Potential {
        total: nonresonant + resonant,
        nonresonant,
        resonant,
    })
}

/// ΔU = (k_BT/2)Σ_k ħω_kn d·Γ₀''·d with Γ₀'' in nm⁻³ eV⁻².
pub fn retardation_correction(p: &Particle, gamma0_second: &Matrix3<f64>, temperature: f64) -> f64 {
    0.5 * thermal_energy(temperature)
        * p.transitions
            .iter()
            .map(|t| t.omega_ev * t.dipole.contract(gamma0_second))
            .sum::<f64>()
        * DEBYE2_PER_EPS0
}

/// ΔU = k_BT Σ_k d·ΔΓ_k·d/ħω_kn for one ΔΓ per transition.
pub fn reflectivity_correction(p: &Particle, delta: &[Matrix3<f64>], temperature: f64) -> Result<f64> {
    if delta.len() != p.transitions.len() {
        return Err(Error::validation(format!(
            "expected {} ΔΓ tensors, got {}",
            p.transitions.len(),
            delta.len()
        )));
    }
    Ok(thermal_energy(temperature)
        * p.transitions
            .iter()
            .zip(delta)
            .map(|(t, d)| t.dipole.contract(d) / t.omega_ev)
            .sum::<f64>()
        * DEBYE2_PER_EPS0)
}

/// ΔΓ = Re Γ_{|ω_kn|} − Γ₀ for every transition.
pub fn gamma_differences(p: &Particle, gamma: &dyn GammaProvider) -> Result<Vec<Matrix3<f64>>> {
    let g0 = gamma.gamma0()?;
    p.transitions
        .iter()
        .map(|t| Ok(real(&gamma.gamma(Complex64::new(t.omega_ev.abs(), 0.0))?) - g0))
        .collect()
}

/// Leading high-temperature correction k_BT Σ_k d·(Re Γ_ω − Γ₀)·d/ħω_kn.
///
/// With a retarded provider this holds both the retardation and the
/// reflectivity parts; with a nonretarded one only the latter.
pub fn linear_t_correction(p: &Particle, gamma: &dyn GammaProvider, temperature: f64) -> Result<f64> {
    reflectivity_correction(p, &gamma_differences(p, gamma)?, temperature)
}
