//! Perfect-conductor closed forms and the linear-T correction ratios.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::born_solver::{GammaTensor, Kernel};
use crate::materials::{drude_surface_factor, Material};
use crate::numerics::{bessel_i_ratios, bessel_table, integrate_finite, integrate_semi_infinite, QuadratureSpec, Scheme};
use crate::units::{thermal_energy, DEBYE2_PER_EPS0, HBAR_C};
use crate::{Error, Result};

/// Geometries with tabulated correction constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeometryClass {
    /// Particle at surface distance `distance` from a sphere of radius `radius`.
    SphereExternal { radius: f64, distance: f64 },
    Plate { distance: f64 },
    /// Particle at the centre of a spherical cavity, so z = R.
    SphericalCavity { radius: f64 },
    CylindricalCavity { radius: f64, rho: f64 },
}

impl GeometryClass {
    pub fn tag(&self) -> &'static str {
        match self {
            GeometryClass::SphereExternal { .. } => "sphere_external",
            GeometryClass::Plate { .. } => "plate",
            GeometryClass::SphericalCavity { .. } => "spherical_cavity",
            GeometryClass::CylindricalCavity { .. } => "cylindrical_cavity",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            GeometryClass::SphereExternal { radius, distance } => radius > 0.0 && distance > 0.0,
            GeometryClass::Plate { distance } => distance > 0.0,
            GeometryClass::SphericalCavity { radius } => radius > 0.0,
            GeometryClass::CylindricalCavity { radius, rho } => radius > 0.0 && (0.0..radius).contains(&rho),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!("invalid {} dimensions: {self:?}", self.tag())))
        }
    }

    /// Particle–surface distance z.
    pub fn distance(&self) -> f64 {
        match *self {
            GeometryClass::SphereExternal { distance, .. } | GeometryClass::Plate { distance } => distance,
            GeometryClass::SphericalCavity { radius } => radius,
            GeometryClass::CylindricalCavity { radius, rho } => radius - rho,
        }
    }

    /// (c_retard, c_refl).
    pub fn constants(&self) -> Result<(f64, f64)> {
        self.validate()?;
        match *self {
            GeometryClass::SphereExternal { radius, distance } => Ok((-1.0 / 3.0, radius / distance)),
            GeometryClass::Plate { .. } => Ok((0.0, 6.0)),
            GeometryClass::SphericalCavity { .. } => Ok((3.0 / 5.0, 3.0)),
            GeometryClass::CylindricalCavity { .. } => Err(Error::validation(
                "no closed correction constants for the cylindrical cavity",
            )),
        }
    }
}

/// Static Γ₀ of a perfectly conducting half space z < 0 at height z.
pub fn plate_gamma0(z: f64) -> Result<GammaTensor> {
    if !(z > 0.0) {
        return Err(Error::domain(format!("plate distance must be positive, got {z}")));
    }
    let g = Matrix3::from_diagonal(&Vector3::new(1.0, 1.0, 2.0)) / (32.0 * PI * z * z * z);
    Ok(GammaTensor {
        value: g.map(|v| Complex64::new(v, 0.0)),
        frequency: Complex64::new(0.0, 0.0),
        point: Vector3::new(0.0, 0.0, z),
        kernel: Kernel::Nonretarded,
    })
}

/// Tr Γ₀ outside a perfectly conducting sphere, r the centre distance.
pub fn sphere_trace_gamma0(r: f64, radius: f64) -> Result<f64> {
    if !(radius > 0.0 && r > radius) {
        return Err(Error::domain(format!("sphere formula needs r > R > 0 (r = {r}, R = {radius})")));
    }
    let (r2, a2) = (r * r, radius * radius);
    Ok(radius * a2 * (6.0 * r2 * r2 - 3.0 * r2 * a2 + a2 * a2) / (4.0 * PI * r2 * r2 * (r2 - a2).powi(3)))
}

/// Potential (eV) of an isotropic particle with Σ|d|² = `d2_sum` Debye².
pub fn sphere_potential_pc(r: f64, radius: f64, d2_sum: f64) -> Result<f64> {
    Ok(isotropic_potential(sphere_trace_gamma0(r, radius)?, d2_sum))
}

/// U = −(Σ|d|²/6ε₀)·Tr Γ₀ in eV.
pub fn isotropic_potential(trace: f64, d2_sum: f64) -> f64 {
    -d2_sum * DEBYE2_PER_EPS0 * trace / 6.0
}

/// Range and weights of the azimuthal sum in the cylinder formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MSum {
    /// Σ_{m ≥ 0} with the m = 0 term halved.
    #[default]
    HalfZero,
    /// Σ_{m ≥ 0} with unit weights.
    FullZero,
    /// Σ_{m = −∞}^{∞}.
    Symmetric,
}

impl MSum {
    pub fn tag(self) -> &'static str {
        match self {
            MSum::HalfZero => "m>=0,w0=1/2",
            MSum::FullZero => "m>=0,w0=1",
            MSum::Symmetric => "m=-inf..inf",
        }
    }

    fn weight(self, m: usize) -> f64 {
        match (self, m) {
            (MSum::HalfZero, 0) => 0.5,
            (MSum::Symmetric, 0) => 1.0,
            (MSum::Symmetric, _) => 2.0,
            _ => 1.0,
        }
    }
}

impl std::str::FromStr for MSum {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "half" | "m>=0,w0=1/2" => Ok(MSum::HalfZero),
            "full" | "m>=0,w0=1" => Ok(MSum::FullZero),
            "symmetric" | "m=-inf..inf" => Ok(MSum::Symmetric),
            other => Err(Error::validation(format!("unknown m-sum convention '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CylinderOptions {
    pub convention: MSum,
    pub quadrature: QuadratureSpec,
    /// Relative size below which two consecutive m-terms end the sum.
    pub m_tol: f64,
}

impl Default for CylinderOptions {
    fn default() -> Self {
        CylinderOptions {
            convention: MSum::HalfZero,
            quadrature: QuadratureSpec::default(),
            m_tol: 1e-10,
        }
    }
}

// e^{−2t} envelope below 1e−16
const CUTOFF: f64 = 18.420_680_743_952_367;

/// m-summed integrand in the scaled variable t = q(R − ρ), times R³.
///
/// Each term K_m(x)/I_m(x)·I_m(y)² is evaluated as κ_m·Q_m² with
/// κ_m = K_m(x)I_m(x) and Q_m = I_m(y)/I_m(x), both representable at every
/// order, so high orders at small q neither overflow nor underflow.
fn cylinder_integrand(t: f64, rho: f64, radius: f64, opts: &CylinderOptions) -> Result<f64> {
    let gap = radius - rho;
    let q = t / gap;
    let x = q * radius;
    if t == 0.0 || (-2.0 * t).exp() == 0.0 {
        return Ok(0.0);
    }
    let scale = radius.powi(3) / gap;
    let outer = bessel_table(1, x, true)?;
    let kappa0 = outer.k[0] * outer.i[0];
    let kappa1 = outer.k[1] * outer.i[1];
    if rho == 0.0 {
        // (m/ρ)I_m(qρ) → q/2 for m = 1, higher orders vanish
        let s = opts.convention.weight(0) * kappa0 / (outer.i[0] * outer.i[0])
            + opts.convention.weight(1) * kappa1 / (outer.i[1] * outer.i[1]) * 0.5;
        return Ok(s * q * q * (-2.0 * x).exp() * scale);
    }
    let y = q * rho;
    let inner = bessel_table(0, y, true)?;
    let q0 = inner.i[0] / outer.i[0] * (y - x).exp();
    let mut m_max = 16usize;
    loop {
        let hx = bessel_i_ratios(m_max, x)?;
        let hy = bessel_i_ratios(m_max, y)?;
        let (mut kappa_prev, mut kappa) = (0.0, kappa0);
        let mut qm = q0;
        let mut sum = 0.0;
        let mut small = 0;
        for m in 0..=m_max {
            let mf = m as f64;
            if m == 1 {
                kappa_prev = kappa0;
                kappa = kappa1;
            } else if m >= 2 {
                let next = hx[m - 1] * (kappa_prev * hx[m - 2] + 2.0 * (mf - 1.0) / x * kappa);
                kappa_prev = kappa;
                kappa = next;
            }
            if m >= 1 {
                qm *= hy[m - 1] / hx[m - 1];
            }
            let qp = qm * (hy[m] + mf / y);
            let term = opts.convention.weight(m) * kappa * (((mf / rho).powi(2) + q * q) * qm * qm + q * q * qp * qp);
            sum += term;
            if m >= 2 && term.abs() <= opts.m_tol * sum.abs() {
                small += 1;
                if small >= 2 {
                    return Ok(sum * scale);
                }
            } else {
                small = 0;
            }
        }
        if m_max >= MAX_M {
            return Err(Error::NonConvergence {
                message: format!("m-sum needs more than {m_max} orders at ρ/R = {}", rho / radius),
                best: sum * scale,
            });
        }
        m_max = (2 * m_max).min(MAX_M);
    }
}

const MAX_M: usize = 4096;

/// Tr Γ₀ inside a perfectly conducting cylindrical cavity at axis distance ρ.
pub fn cylinder_trace_gamma0(rho: f64, radius: f64, opts: &CylinderOptions) -> Result<f64> {
    if !(radius > 0.0 && rho >= 0.0 && rho < radius) {
        return Err(Error::domain(format!("cylinder formula needs 0 ≤ ρ < R (ρ = {rho}, R = {radius})")));
    }
    let mut failure = None;
    let mut f = |t: f64| match cylinder_integrand(t, rho, radius, opts) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let value = match opts.quadrature.scheme {
        Scheme::GaussKronrod => {
            let body = integrate_finite(&mut f, 0.0, CUTOFF, &opts.quadrature)?;
            // tail bound: the envelope decays at least as e^{−2t} beyond the cutoff
            body.value + 0.5 * f(CUTOFF)
        }
        Scheme::DoubleExponential => integrate_semi_infinite(&mut f, &opts.quadrature)?.value,
    };
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(value / (PI * PI * radius.powi(3)))
}

/// Potential (eV) inside a perfectly conducting cylindrical cavity.
pub fn cylinder_potential_pc(rho: f64, radius: f64, d2_sum: f64, opts: &CylinderOptions) -> Result<f64> {
    Ok(isotropic_potential(cylinder_trace_gamma0(rho, radius, opts)?, d2_sum))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionRatios {
    pub retardation: f64,
    pub reflectivity: f64,
}

impl CorrectionRatios {
    /// The two corrections add at linear order.
    pub fn total(&self) -> f64 {
        self.retardation + self.reflectivity
    }
}

/// ΔU/U(T=0) from retardation and reflectivity for signed ħω_kn (eV).
pub fn correction_ratios(g: &GeometryClass, omega_kn: f64, temperature: f64, m: &Material) -> Result<CorrectionRatios> {
    let (c_retard, c_refl) = g.constants()?;
    if omega_kn == 0.0 || !omega_kn.is_finite() {
        return Err(Error::domain("correction ratios need ω_kn ≠ 0"));
    }
    if temperature < 0.0 {
        return Err(Error::domain(format!("negative temperature {temperature} K")));
    }
    let z = g.distance();
    let thermal = thermal_energy(temperature) / omega_kn;
    let zk = z * omega_kn / HBAR_C;
    let sf = drude_surface_factor(m, omega_kn)?;
    let factor = sf.approx.unwrap_or(sf.exact);
    Ok(CorrectionRatios {
        retardation: c_retard * thermal * zk * zk,
        reflectivity: -c_refl * thermal * zk.abs() * factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sphere_at_twice_radius() {
        let u = sphere_potential_pc(2.0, 1.0, 1.0).unwrap();
        let expected = -85.0 * DEBYE2_PER_EPS0 / (10368.0 * PI);
        assert!((u / expected - 1.0).abs() < 1e-14);
    }

    #[test]
    fn on_axis_limit_is_continuous() {
        let opts = CylinderOptions::default();
        let a = cylinder_trace_gamma0(0.0, 1.0, &opts).unwrap();
        let b = cylinder_trace_gamma0(1e-5, 1.0, &opts).unwrap();
        assert!((a / b - 1.0).abs() < 1e-8, "{a} {b}");
    }

    #[test]
    fn conventions_differ_by_the_zero_term() {
        let rho = 0.4;
        let tr = |c| {
            cylinder_trace_gamma0(
                rho,
                1.0,
                &CylinderOptions {
                    convention: c,
                    ..Default::default()
                },
            )
            .unwrap()
        };
        assert!((tr(MSum::Symmetric) / tr(MSum::HalfZero) - 2.0).abs() < 1e-12);
        assert!(tr(MSum::FullZero) > tr(MSum::HalfZero));
    }
}
