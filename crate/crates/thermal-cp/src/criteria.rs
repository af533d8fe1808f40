//! Validity criteria for the temperature-independent potential.

use std::fmt;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;

use crate::born_solver::VoxelBody;
use crate::thermal::{GammaProvider, Particle};
use crate::units::{thermal_energy, HBAR_C};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub pass: f64,
    pub marginal: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            pass: 0.05,
            marginal: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Pass,
    Marginal,
    Fail,
}

impl Thresholds {
    pub fn verdict(&self, parameter: f64) -> Verdict {
        if parameter < self.pass {
            Verdict::Pass
        } else if parameter < self.marginal {
            Verdict::Marginal
        } else {
            Verdict::Fail
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Marginal => "marginal",
            Verdict::Fail => "fail",
        })
    }
}

/// (k_BT/ħ|ω_kn|)(z̃ω_kn/c)² per transition.
pub fn check_retardation(p: &Particle, z_tilde: f64, temperature: f64) -> Vec<f64> {
    let kt = thermal_energy(temperature);
    p.transitions
        .iter()
        .map(|t| {
            let zk = z_tilde * t.omega_ev / HBAR_C;
            kt / t.omega_ev.abs() * zk * zk
        })
        .collect()
}

/// (k_BT/ħ|ω_kn|)‖Re Γ^nret_{ω_kn} − Γ₀‖/‖Γ₀‖ (Frobenius) per transition.
pub fn check_reflectivity(p: &Particle, nonretarded: &dyn GammaProvider, temperature: f64) -> Result<Vec<f64>> {
    let g0 = nonretarded.gamma0()?;
    let n0 = g0.norm();
    if n0 == 0.0 {
        return Err(Error::domain("‖Γ₀‖ = 0: degenerate geometry"));
    }
    let kt = thermal_energy(temperature);
    p.transitions
        .iter()
        .map(|t| {
            let g = nonretarded.gamma(Complex64::new(t.omega_ev.abs(), 0.0))?.map(|v| v.re);
            Ok(kt / t.omega_ev.abs() * (g - g0).norm() / n0)
        })
        .collect()
}

/// (|d_nl|/|d_nk|)(k_BT/ħ|ω_ln|)·Q for every transition l other than the
/// dominant one k.
pub fn check_dominance(
    p: &Particle,
    dominant: usize,
    temperature: f64,
    q_factor: Option<f64>,
) -> Result<Vec<(usize, f64)>> {
    let k = p
        .transitions
        .get(dominant)
        .ok_or_else(|| Error::validation(format!("no transition {dominant}")))?;
    let dk = k.dipole.strength().sqrt();
    if dk == 0.0 {
        return Err(Error::domain("dominance undefined for a vanishing dominant dipole"));
    }
    let kt = thermal_energy(temperature);
    let q = q_factor.unwrap_or(1.0);
    Ok(p.transitions
        .iter()
        .enumerate()
        .filter(|(l, _)| *l != dominant)
        .map(|(l, t)| (l, q * t.dipole.strength().sqrt() / dk * kt / t.omega_ev.abs()))
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EtaClass {
    /// η > 1: corrections vanish as ω → 0.
    Suppressible,
    /// η = 1.
    Marginal,
    /// η < 1: the linear-T slope has a minimum in ω.
    Floor,
}

impl EtaClass {
    pub fn tag(self) -> &'static str {
        match self {
            EtaClass::Suppressible => "i",
            EtaClass::Marginal => "ii",
            EtaClass::Floor => "iii",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaFit {
    pub eta: f64,
    /// Standard error of the fitted slope.
    pub residual: f64,
    pub class: EtaClass,
    pub range: (f64, f64),
}

/// Least-squares slope of log‖ΔΓ‖ against log ω.
pub fn estimate_eta(samples: &[(f64, f64)]) -> Result<EtaFit> {
    if samples.len() < 4 {
        return Err(Error::Fit(format!("need at least 4 samples, got {}", samples.len())));
    }
    if samples.iter().any(|&(w, n)| !(w > 0.0 && n > 0.0)) {
        return Err(Error::Fit("frequencies and norms must be positive".into()));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let rising = sorted.windows(2).all(|w| w[1].1 > w[0].1);
    let falling = sorted.windows(2).all(|w| w[1].1 < w[0].1);
    if !(rising || falling) {
        return Err(Error::Fit("‖ΔΓ‖ is not monotone over the frequency grid".into()));
    }
    let pts: Vec<(f64, f64)> = sorted.iter().map(|&(w, n)| (w.ln(), n.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let eta = sxy / sxx;
    let rss: f64 = pts.iter().map(|p| (p.1 - my - eta * (p.0 - mx)).powi(2)).sum();
    let residual = (rss / (n - 2.0) / sxx).sqrt();
    let band = (2.0 * residual).max(1e-3);
    let class = if (eta - 1.0).abs() <= band {
        EtaClass::Marginal
    } else if eta > 1.0 {
        EtaClass::Suppressible
    } else {
        EtaClass::Floor
    };
    Ok(EtaFit {
        eta,
        residual,
        class,
        range: (sorted[0].0, sorted[sorted.len() - 1].0),
    })
}

/// Index of a strict interior minimum of `values`, if any.
pub fn interior_minimum(values: &[f64]) -> Option<usize> {
    let (i, _) = values
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))?;
    (i > 0 && i + 1 < values.len()).then_some(i)
}

/// The extent z̃: the distance from r within which all but `fraction` of the
/// single-scattering weight Σ|u_i|V_i/|s_i − r|⁶ of the body lies.
pub fn effective_extent(body: &VoxelBody, r: &Vector3<f64>, strengths: &[Complex64], fraction: f64) -> Result<f64> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::validation(format!("contribution cutoff must lie in (0, 1), got {fraction}")));
    }
    let mut cells: Vec<(f64, f64)> = body
        .cells
        .iter()
        .map(|c| {
            let rho = (c.center - r).norm();
            (rho, strengths[c.material].norm() * c.volume / rho.powi(6))
        })
        .collect();
    if cells.is_empty() {
        return Err(Error::domain("empty body has no extent"));
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = cells.iter().map(|c| c.1).sum();
    let mut acc = 0.0;
    for &(rho, w) in &cells {
        acc += w;
        if acc >= (1.0 - fraction) * total {
            return Ok(rho);
        }
    }
    Ok(cells[cells.len() - 1].0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionReport {
    pub omega_ev: f64,
    pub retardation: f64,
    pub retardation_verdict: Verdict,
    pub reflectivity: f64,
    pub reflectivity_verdict: Verdict,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CriteriaReport {
    pub temperature: f64,
    pub z_tilde: f64,
    pub q_factor: Option<f64>,
    pub thresholds: Thresholds,
    pub transitions: Vec<TransitionReport>,
    /// Dominant transition and (l, parameter, verdict) for the others.
    pub dominance: Option<(usize, Vec<(usize, f64, Verdict)>)>,
    pub eta: Option<EtaFit>,
    /// Predicted linear-T correction ΔU/T in eV/K.
    pub slope: Option<f64>,
}

impl CriteriaReport {
    pub fn overall(&self) -> Verdict {
        let per = self
            .transitions
            .iter()
            .flat_map(|t| [t.retardation_verdict, t.reflectivity_verdict]);
        let dom = self.dominance.iter().flat_map(|(_, v)| v.iter().map(|x| x.2));
        per.chain(dom).max().unwrap_or(Verdict::Pass)
    }

    /// Flat `key = value` lines.
    pub fn key_values(&self) -> Vec<(String, String)> {
        let mut kv = vec![
            ("temperature_k".into(), format!("{:.9e}", self.temperature)),
            ("z_tilde_nm".into(), format!("{:.9e}", self.z_tilde)),
            ("threshold_pass".into(), format!("{}", self.thresholds.pass)),
            ("threshold_marginal".into(), format!("{}", self.thresholds.marginal)),
            ("norm".into(), "frobenius".into()),
        ];
        if let Some(q) = self.q_factor {
            kv.push(("q_factor".into(), format!("{q}")));
        }
        for (i, t) in self.transitions.iter().enumerate() {
            kv.push((format!("transition.{i}.omega_ev"), format!("{:.9e}", t.omega_ev)));
            kv.push((format!("transition.{i}.retardation"), format!("{:.9e}", t.retardation)));
            kv.push((format!("transition.{i}.retardation_verdict"), t.retardation_verdict.to_string()));
            kv.push((format!("transition.{i}.reflectivity"), format!("{:.9e}", t.reflectivity)));
            kv.push((format!("transition.{i}.reflectivity_verdict"), t.reflectivity_verdict.to_string()));
        }
        if let Some((k, pairs)) = &self.dominance {
            kv.push(("dominance.dominant".into(), k.to_string()));
            for (l, v, verdict) in pairs {
                kv.push((format!("dominance.{l}"), format!("{v:.9e}")));
                kv.push((format!("dominance.{l}.verdict"), verdict.to_string()));
            }
        }
        if let Some(e) = &self.eta {
            kv.push(("eta".into(), format!("{:.9e}", e.eta)));
            kv.push(("eta.residual".into(), format!("{:.9e}", e.residual)));
            kv.push(("eta.class".into(), e.class.tag().into()));
            kv.push(("eta.range_ev".into(), format!("{:.9e}:{:.9e}", e.range.0, e.range.1)));
        }
        if let Some(s) = self.slope {
            kv.push(("linear_t_slope_ev_per_k".into(), format!("{s:.9e}")));
        }
        kv.push(("overall".into(), self.overall().to_string()));
        kv
    }
}

/// Evaluates criteria (A)–(C) for every transition.
pub fn criteria_report(
    p: &Particle,
    nonretarded: &dyn GammaProvider,
    z_tilde: f64,
    temperature: f64,
    q_factor: Option<f64>,
    thresholds: Thresholds,
) -> Result<CriteriaReport> {
    let ret = check_retardation(p, z_tilde, temperature);
    let refl = check_reflectivity(p, nonretarded, temperature)?;
    let transitions: Vec<TransitionReport> = p
        .transitions
        .iter()
        .zip(ret.iter().zip(&refl))
        .map(|(t, (&a, &b))| TransitionReport {
            omega_ev: t.omega_ev,
            retardation: a,
            retardation_verdict: thresholds.verdict(a),
            reflectivity: b,
            reflectivity_verdict: thresholds.verdict(b),
        })
        .collect();
    // dominant: the strongest transition satisfying (A) and (B)
    let dominant = transitions
        .iter()
        .enumerate()
        .filter(|(_, t)| t.retardation_verdict == Verdict::Pass && t.reflectivity_verdict == Verdict::Pass)
        .max_by(|a, b| {
            p.transitions[a.0]
                .dipole
                .strength()
                .total_cmp(&p.transitions[b.0].dipole.strength())
        })
        .map(|(i, _)| i);
    let dominance = match dominant {
        Some(k) => {
            let pairs = check_dominance(p, k, temperature, q_factor)?
                .into_iter()
                .filter(|(l, _)| {
                    transitions[*l].retardation_verdict != Verdict::Pass
                        || transitions[*l].reflectivity_verdict != Verdict::Pass
                })
                .map(|(l, v)| (l, v, thresholds.verdict(v)))
                .collect();
            Some((k, pairs))
        }
        None => None,
    };
    Ok(CriteriaReport {
        temperature,
        z_tilde,
        q_factor,
        thresholds,
        transitions,
        dominance,
        eta: None,
        slope: None,
    })
}

/// ‖Re Γ_ω − Γ₀‖ (Frobenius) on a frequency grid (eV).
pub fn delta_gamma_samples(gamma: &dyn GammaProvider, omegas: &[f64]) -> Result<Vec<(f64, f64)>> {
    let g0: Matrix3<f64> = gamma.gamma0()?;
    omegas
        .iter()
        .map(|&w| {
            let g = gamma.gamma(Complex64::new(w, 0.0))?.map(|v| v.re);
            Ok((w, (g - g0).norm()))
        })
        .collect()
}
