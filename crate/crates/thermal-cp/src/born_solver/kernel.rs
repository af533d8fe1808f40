//! The dyadic dipole kernel A(ρ).

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Kernel {
    Retarded,
    Nonretarded,
}

impl Kernel {
    pub fn tag(self) -> &'static str {
        match self {
            Kernel::Retarded => "retarded",
            Kernel::Nonretarded => "nonretarded",
        }
    }
}

impl std::str::FromStr for Kernel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "retarded" => Ok(Kernel::Retarded),
            "nonretarded" => Ok(Kernel::Nonretarded),
            other => Err(Error::validation(format!("unknown kernel '{other}'"))),
        }
    }
}

/// −(I − 3ee)/(4πρ³).
pub fn static_kernel(rho: &Vector3<f64>) -> Matrix3<f64> {
    let r2 = rho.norm_squared();
    let r = r2.sqrt();
    let e = rho / r;
    (e * e.transpose() * 3.0 - Matrix3::identity()) / (4.0 * PI * r2 * r)
}

/// Retarded kernel at complex wavenumber k (nm⁻¹).
pub fn retarded_kernel(rho: &Vector3<f64>, k: Complex64) -> Matrix3<Complex64> {
    let r = rho.norm();
    let e = rho / r;
    let ee = (e * e.transpose()).map(|v| Complex64::new(v, 0.0));
    let i = Complex64::i();
    let kr = k * r;
    let pre = -(i * kr).exp() / (4.0 * PI * r * r * r);
    let a = 1.0 - i * kr - kr * kr;
    let b = 3.0 - 3.0 * i * kr - kr * kr;
    (Matrix3::identity() * a - ee * b) * pre
}

/// A(ρ) − A₀(ρ), evaluated without cancellation for small |kρ|.
pub fn retarded_remainder(rho: &Vector3<f64>, k: Complex64) -> Matrix3<Complex64> {
    let r = rho.norm();
    let kr = k * r;
    if kr.norm() > 0.05 {
        return retarded_kernel(rho, k) - static_kernel(rho).map(|v| Complex64::new(v, 0.0));
    }
    // series in x = ikρ of −e^{x}[(1 − x + x²)I − (3 − 3x + x²)ee] + (I − 3ee)
    let e = rho / r;
    let ee = (e * e.transpose()).map(|v| Complex64::new(v, 0.0));
    let x = Complex64::i() * kr;
    // coefficients of x^n for the I and ee parts, n ≥ 2
    let mut ci = Complex64::new(0.0, 0.0);
    let mut ce = Complex64::new(0.0, 0.0);
    let mut xn = x * x;
    let mut fact = 2.0;
    for n in 2..14 {
        let nf = n as f64;
        // [x^n] e^{x}(1 − x + x²) = 1/n! − 1/(n−1)! + 1/(n−2)!
        let p = (1.0 - nf + nf * (nf - 1.0)) / fact;
        // [x^n] e^{x}(3 − 3x + x²)
        let q = (3.0 - 3.0 * nf + nf * (nf - 1.0)) / fact;
        ci += xn * p;
        ce += xn * q;
        xn *= x;
        fact *= nf + 1.0;
    }
    (Matrix3::identity().map(|v| Complex64::new(v, 0.0)) * ci - ee * ce) * Complex64::new(-1.0 / (4.0 * PI * r * r * r), 0.0)
}

/// The kernel A(ρ) for either model.
pub fn kernel_a(rho: &Vector3<f64>, k: Complex64, kernel: Kernel) -> Result<Matrix3<Complex64>> {
    if !(rho.norm() > 0.0) {
        return Err(Error::domain("kernel_A is undefined at ρ = 0"));
    }
    Ok(match kernel {
        Kernel::Nonretarded => static_kernel(rho).map(|v| Complex64::new(v, 0.0)),
        Kernel::Retarded => retarded_kernel(rho, k),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn remainder_series_matches_direct() {
        let rho = Vector3::new(0.3, -1.2, 0.7);
        for k in [Complex64::new(0.03, 0.0), Complex64::new(0.0, 0.04)] {
            let a = retarded_remainder(&rho, k);
            let b = retarded_kernel(&rho, k) - static_kernel(&rho).map(|v| Complex64::new(v, 0.0));
            assert!((a - b).norm() < 1e-12 * b.norm(), "{a} {b}");
        }
    }

    #[test]
    fn imaginary_wavenumber_is_real() {
        let rho = Vector3::new(1.0, 2.0, -0.5);
        let a = retarded_kernel(&rho, Complex64::new(0.0, 0.3));
        assert!(a.iter().all(|v| v.im.abs() < 1e-15));
    }
}
