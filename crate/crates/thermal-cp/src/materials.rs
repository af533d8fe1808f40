//! Permittivity models on the real and imaginary frequency axes.
//!
//! Frequencies are complex photon energies ħω in eV. A query on the imaginary
//! axis is ħω = iħξ with ξ > 0; a query on the real axis has zero imaginary
//! part.

use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Material {
    Drude { plasma_ev: f64, gamma_ev: f64 },
    PerfectConductor,
    Tabulated(Arc<Table>),
}

/// Tabulated permittivity: real ε(iξ) on the imaginary axis and complex ε(ω)
/// on the real axis, each on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub imaginary: Vec<(f64, f64)>,
    pub real: Vec<(f64, Complex64)>,
    pub source: String,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Epsilon {
    Finite(Complex64),
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Permittivity {
    pub eps: Epsilon,
    /// Set when a tabulated value was clamped outside its grid.
    pub extrapolated: bool,
}

impl Permittivity {
    pub fn finite(self) -> Option<Complex64> {
        match self.eps {
            Epsilon::Finite(e) => Some(e),
            Epsilon::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceFactor {
    /// ω_P⁻¹·[½(√(ω²+γ²)+|ω|)|ω|]^{1/2}; absent for tabulated data.
    pub approx: Option<f64>,
    /// Re[i/√ε(|ω|)].
    pub exact: f64,
}

enum Axis {
    Real(f64),
    Imaginary(f64),
    General,
}

fn classify(omega: Complex64) -> Axis {
    if omega.im == 0.0 {
        Axis::Real(omega.re)
    } else if omega.re == 0.0 {
        Axis::Imaginary(omega.im)
    } else {
        Axis::General
    }
}

impl Material {
    pub fn drude(plasma_ev: f64, gamma_ev: f64) -> Result<Self> {
        let m = Material::Drude {
            plasma_ev,
            gamma_ev,
        };
        m.validate()?;
        Ok(m)
    }

    /// Gold parameters ω_P = 9 eV, γ = 35 meV.
    pub fn gold() -> Self {
        Material::Drude {
            plasma_ev: 9.0,
            gamma_ev: 0.035,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Material::Drude {
                plasma_ev,
                gamma_ev,
            } => {
                if !(*plasma_ev > 0.0 && *gamma_ev > 0.0) {
                    return Err(Error::validation(format!(
                        "Drude parameters must be positive (plasma {plasma_ev} eV, gamma {gamma_ev} eV)"
                    )));
                }
            }
            Material::PerfectConductor => {}
            Material::Tabulated(t) => t.validate()?,
        }
        Ok(())
    }

    pub fn is_perfect_conductor(&self) -> bool {
        matches!(self, Material::PerfectConductor)
    }

    pub fn tag(&self) -> String {
        match self {
            Material::Drude {
                plasma_ev,
                gamma_ev,
            } => format!("drude(plasma={plasma_ev},gamma={gamma_ev})"),
            Material::PerfectConductor => "pec".into(),
            Material::Tabulated(t) => format!("table({})", t.source),
        }
    }
}

/// ε(ω) at complex photon energy ħω (eV).
pub fn permittivity(m: &Material, omega: Complex64) -> Result<Permittivity> {
    let finite = |e| {
        Ok(Permittivity {
            eps: Epsilon::Finite(e),
            extrapolated: false,
        })
    };
    match m {
        Material::PerfectConductor => Ok(Permittivity {
            eps: Epsilon::Infinite,
            extrapolated: false,
        }),
        Material::Drude {
            plasma_ev,
            gamma_ev,
        } => match classify(omega) {
            Axis::Imaginary(xi) if xi <= 0.0 => Err(Error::domain(format!(
                "imaginary-axis query needs ξ > 0, got {xi}"
            ))),
            Axis::Real(w) if w == 0.0 => Err(Error::StaticDivergence),
            Axis::Imaginary(xi) => finite(Complex64::new(
                1.0 + plasma_ev * plasma_ev / (xi * (xi + gamma_ev)),
                0.0,
            )),
            _ => {
                let i = Complex64::i();
                finite(1.0 - plasma_ev * plasma_ev / (omega * (omega + i * *gamma_ev)))
            }
        },
        Material::Tabulated(t) => match classify(omega) {
            Axis::Imaginary(xi) if xi <= 0.0 => Err(Error::domain(format!(
                "imaginary-axis query needs ξ > 0, got {xi}"
            ))),
            Axis::Imaginary(xi) => {
                let (v, ext) = t.eval_imaginary(xi)?;
                Ok(Permittivity {
                    eps: Epsilon::Finite(Complex64::new(v, 0.0)),
                    extrapolated: ext,
                })
            }
            Axis::Real(w) => {
                let (v, ext) = t.eval_real(w)?;
                Ok(Permittivity {
                    eps: Epsilon::Finite(v),
                    extrapolated: ext,
                })
            }
            Axis::General => Err(Error::domain(
                "tabulated permittivity is only defined on the real and imaginary axes",
            )),
        },
    }
}

/// Born-series strength u = χ/(1 + χ/3) with χ = ε − 1.
pub fn born_strength(m: &Material, omega: Complex64) -> Result<Complex64> {
    match m {
        Material::PerfectConductor => Ok(Complex64::new(3.0, 0.0)),
        Material::Drude { .. } if omega == Complex64::new(0.0, 0.0) => Ok(Complex64::new(3.0, 0.0)),
        Material::Tabulated(t) if omega == Complex64::new(0.0, 0.0) => {
            let (v, _) = t.eval_imaginary(0.0)?;
            Ok(Complex64::new(strength_of(Complex64::new(v, 0.0)).re, 0.0))
        }
        _ => {
            let p = permittivity(m, omega)?;
            Ok(match p.eps {
                Epsilon::Finite(e) => strength_of(e),
                Epsilon::Infinite => Complex64::new(3.0, 0.0),
            })
        }
    }
}

fn strength_of(eps: Complex64) -> Complex64 {
    let chi = eps - 1.0;
    3.0 * chi / (chi + 3.0)
}

/// Surface factor Re[i/√ε(ω)] and its Drude approximation.
pub fn drude_surface_factor(m: &Material, omega: f64) -> Result<SurfaceFactor> {
    let w = omega.abs();
    match m {
        Material::PerfectConductor => Ok(SurfaceFactor {
            approx: Some(0.0),
            exact: 0.0,
        }),
        _ if w == 0.0 => Ok(SurfaceFactor {
            approx: Some(0.0),
            exact: 0.0,
        }),
        Material::Drude {
            plasma_ev,
            gamma_ev,
        } => {
            let approx = (0.5 * ((w * w + gamma_ev * gamma_ev).sqrt() + w) * w).sqrt() / plasma_ev;
            Ok(SurfaceFactor {
                approx: Some(approx),
                exact: exact_surface_factor(m, w)?,
            })
        }
        Material::Tabulated(_) => Ok(SurfaceFactor {
            approx: None,
            exact: exact_surface_factor(m, w)?,
        }),
    }
}

fn exact_surface_factor(m: &Material, w: f64) -> Result<f64> {
    let eps = permittivity(m, Complex64::new(w, 0.0))?
        .finite()
        .ok_or_else(|| Error::domain("infinite permittivity"))?;
    Ok((Complex64::i() / eps.sqrt()).re)
}

impl Table {
    pub fn validate(&self) -> Result<()> {
        if self.imaginary.is_empty() && self.real.is_empty() {
            return Err(Error::validation(format!("permittivity table {} is empty", self.source)));
        }
        let inc = |xs: &mut dyn Iterator<Item = f64>| {
            let v: Vec<f64> = xs.collect();
            v.windows(2).all(|w| w[1] > w[0]) && v.iter().all(|x| *x >= 0.0)
        };
        if !inc(&mut self.imaginary.iter().map(|p| p.0)) || !inc(&mut self.real.iter().map(|p| p.0)) {
            return Err(Error::validation(format!(
                "permittivity table {} must have strictly increasing non-negative frequencies",
                self.source
            )));
        }
        if self.imaginary.iter().any(|p| p.1 < 1.0) {
            return Err(Error::validation(format!(
                "permittivity table {}: ε(iξ) must be at least 1",
                self.source
            )));
        }
        Ok(())
    }

    /// Reads a plain-text table. Two-column rows (ħξ, ε) are imaginary-axis
    /// samples; three-column rows (ħω, Re ε, Im ε) are real-axis samples.
    /// Lines starting with `#` are comments.
    pub fn read(path: &Path) -> Result<Table> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Table::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, source: &str) -> Result<Table> {
        let mut t = Table {
            source: source.to_string(),
            ..Default::default()
        };
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let cols: std::result::Result<Vec<f64>, _> = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(str::parse::<f64>)
                .collect();
            let cols = cols.map_err(|e| Error::validation(format!("{source}:{}: {e}", n + 1)))?;
            match cols.as_slice() {
                [f, e] => t.imaginary.push((*f, *e)),
                [f, re, im] => t.real.push((*f, Complex64::new(*re, *im))),
                _ => {
                    return Err(Error::validation(format!(
                        "{source}:{}: expected 2 or 3 columns, found {}",
                        n + 1,
                        cols.len()
                    )))
                }
            }
        }
        t.validate()?;
        Ok(t)
    }

    fn eval_imaginary(&self, xi: f64) -> Result<(f64, bool)> {
        if self.imaginary.is_empty() {
            return Err(Error::domain(format!("table {} has no imaginary-axis data", self.source)));
        }
        let xs: Vec<f64> = self.imaginary.iter().map(|p| p.0).collect();
        let ys: Vec<f64> = self.imaginary.iter().map(|p| p.1).collect();
        Ok(pchip(&xs, &ys, xi))
    }

    fn eval_real(&self, w: f64) -> Result<(Complex64, bool)> {
        if self.real.is_empty() {
            return Err(Error::domain(format!("table {} has no real-axis data", self.source)));
        }
        let xs: Vec<f64> = self.real.iter().map(|p| p.0).collect();
        let re: Vec<f64> = self.real.iter().map(|p| p.1.re).collect();
        let im: Vec<f64> = self.real.iter().map(|p| p.1.im).collect();
        let (a, e1) = pchip(&xs, &re, w.abs());
        let (b, e2) = pchip(&xs, &im, w.abs());
        let v = Complex64::new(a, b);
        Ok((if w < 0.0 { v.conj() } else { v }, e1 || e2))
    }
}

/// Fritsch–Carlson monotone cubic interpolation, clamped outside the grid.
fn pchip(xs: &[f64], ys: &[f64], x: f64) -> (f64, bool) {
    let n = xs.len();
    if n == 1 {
        return (ys[0], x != xs[0]);
    }
    if x <= xs[0] {
        return (ys[0], x < xs[0]);
    }
    if x >= xs[n - 1] {
        return (ys[n - 1], x > xs[n - 1]);
    }
    let h: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (ys[i + 1] - ys[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    d[0] = delta[0];
    d[n - 1] = delta[n - 2];
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    let i = xs.partition_point(|v| *v <= x) - 1;
    let t = (x - xs[i]) / h[i];
    let h00 = (1.0 + 2.0 * t) * (1.0 - t) * (1.0 - t);
    let h10 = t * (1.0 - t) * (1.0 - t);
    let h01 = t * t * (3.0 - 2.0 * t);
    let h11 = t * t * (t - 1.0);
    (
        h00 * ys[i] + h10 * h[i] * d[i] + h01 * ys[i + 1] + h11 * h[i] * d[i + 1],
        false,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pchip_hits_nodes_and_clamps() {
        let xs = [0.0, 1.0, 2.0, 4.0];
        let ys = [5.0, 3.0, 2.5, 1.0];
        for (x, y) in xs.iter().zip(ys.iter()) {
            assert!((pchip(&xs, &ys, *x).0 - y).abs() < 1e-14);
        }
        assert_eq!(pchip(&xs, &ys, 9.0), (1.0, true));
        let mid = pchip(&xs, &ys, 3.0).0;
        assert!(mid < 2.5 && mid > 1.0);
    }

    #[test]
    fn table_parse_errors() {
        assert!(Table::parse("1 2 3 4\n", "t").is_err());
        assert!(Table::parse("2 5\n1 4\n", "t").is_err());
        let t = Table::parse("# xi eps\n0.1 50\n1 10\n0.5 -3 20\n", "t").unwrap();
        assert_eq!(t.imaginary.len(), 2);
        assert_eq!(t.real.len(), 1);
    }
}
