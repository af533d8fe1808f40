//! Matsubara frequencies, primed sums and Bose photon numbers.

use std::f64::consts::PI;

use crate::units::K_B;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TailEstimate {
    None,
    PowerLaw,
}

#[derive(Debug, Clone, Copy)]
pub struct MatsubaraPolicy {
    pub rel_tail_tol: f64,
    pub j_max: usize,
    pub tail_estimate: TailEstimate,
}

impl Default for MatsubaraPolicy {
    fn default() -> Self {
        MatsubaraPolicy {
            rel_tail_tol: 1e-10,
            j_max: 2_000_000,
            tail_estimate: TailEstimate::PowerLaw,
        }
    }
}

impl MatsubaraPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.j_max < 1 {
            return Err(Error::domain("j_max must be at least 1"));
        }
        if !(self.rel_tail_tol > 0.0) {
            return Err(Error::domain("rel_tail_tol must be positive"));
        }
        Ok(())
    }
}

/// The Matsubara spacing ħξ₁ = 2πk_BT in eV.
pub fn matsubara_spacing(temperature: f64) -> Result<f64> {
    if !(temperature > 0.0) {
        return Err(Error::domain(format!(
            "Matsubara frequencies need T > 0, got {temperature} K"
        )));
    }
    Ok(2.0 * PI * K_B * temperature)
}

/// ħξ_j for j = 0..=j_max. The j = 0 entry carries half weight in primed sums.
pub fn matsubara_frequencies(temperature: f64, policy: &MatsubaraPolicy) -> Result<Vec<f64>> {
    policy.validate()?;
    let step = matsubara_spacing(temperature)?;
    Ok((0..=policy.j_max).map(|j| j as f64 * step).collect())
}

/// Weight of term j in the primed sum Σ'.
pub fn primed_weight(j: usize) -> f64 {
    if j == 0 {
        0.5
    } else {
        1.0
    }
}

#[derive(Debug, Clone, Copy)]
pub struct MatsubaraSum {
    pub value: f64,
    pub terms: usize,
    pub tail: f64,
}

/// Primed sum Σ'_j term(j, ħξ_j).
///
/// Terms are added until three consecutive ones fall below `rel_tail_tol`
/// times the running sum; the remainder is then estimated assuming ξ⁻² decay.
pub fn matsubara_sum<F>(temperature: f64, policy: &MatsubaraPolicy, mut term: F) -> Result<MatsubaraSum>
where
    F: FnMut(usize, f64) -> Result<f64>,
{
    policy.validate()?;
    let step = matsubara_spacing(temperature)?;
    let mut sum = 0.0;
    let mut small = 0;
    for j in 0..=policy.j_max {
        let t = primed_weight(j) * term(j, j as f64 * step)?;
        sum += t;
        if j > 0 && t.abs() <= policy.rel_tail_tol * sum.abs() {
            small += 1;
        } else {
            small = 0;
        }
        if small >= 3 || (t == 0.0 && j > 0) {
            let tail = match policy.tail_estimate {
                TailEstimate::None => 0.0,
                // Σ_{i>j} t·j²/i² ≈ t·j²/(j + ½)
                TailEstimate::PowerLaw => {
                    let jf = j as f64;
                    t * jf * jf / (jf + 0.5)
                }
            };
            return Ok(MatsubaraSum {
                value: sum + tail,
                terms: j + 1,
                tail,
            });
        }
    }
    Err(Error::NonConvergence {
        message: format!("Matsubara sum not converged after j_max = {}", policy.j_max),
        best: sum,
    })
}

/// Mean thermal photon number n(ω) = 1/(e^{ħω/k_BT} − 1) for signed ħω.
///
/// At T = 0 this is −Θ(−ω).
pub fn photon_number(hbar_omega: f64, temperature: f64) -> Result<f64> {
    if hbar_omega == 0.0 || !hbar_omega.is_finite() {
        return Err(Error::domain("photon number needs ω ≠ 0"));
    }
    if temperature < 0.0 {
        return Err(Error::domain(format!("negative temperature {temperature} K")));
    }
    if temperature == 0.0 {
        return Ok(if hbar_omega > 0.0 { 0.0 } else { -1.0 });
    }
    let x = hbar_omega / (K_B * temperature);
    if x > 0.0 {
        Ok(1.0 / x.exp_m1())
    } else {
        Ok(-1.0 - 1.0 / (-x).exp_m1())
    }
}
