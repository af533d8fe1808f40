//! Adaptive Gauss–Kronrod and double-exponential quadrature.

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    GaussKronrod,
    DoubleExponential,
}

#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    pub scheme: Scheme,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            scheme: Scheme::GaussKronrod,
            rel_tol: 1e-10,
            abs_tol: 0.0,
            max_evals: 200_000,
        }
    }
}

impl QuadratureSpec {
    pub fn new(scheme: Scheme, rel_tol: f64) -> Self {
        QuadratureSpec {
            scheme,
            rel_tol,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) {
            return Err(Error::domain("rel_tol must be positive"));
        }
        if self.max_evals < 100 {
            return Err(Error::domain("max_evals must be at least 100"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    let kron = kron * h;
    let gauss = gauss * h;
    (kron, (kron - gauss).abs())
}

/// Adaptive Gauss–Kronrod (7/15) on a finite interval.
pub fn integrate_finite<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    spec.validate()?;
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gk15(&mut f, a, b);
    panels.push((a, b, v, e));
    let mut evals = 15;
    loop {
        let value: f64 = panels.iter().map(|p| p.2).sum();
        let error: f64 = panels.iter().map(|p| p.3).sum();
        if !value.is_finite() {
            return Err(Error::NonConvergence {
                message: "integrand produced non-finite values".into(),
                best: value,
            });
        }
        if error <= (spec.rel_tol * value.abs()).max(spec.abs_tol) {
            return Ok(Integral { value, error, evals });
        }
        if evals + 30 > spec.max_evals {
            return Err(Error::NonConvergence {
                message: format!("Gauss-Kronrod exhausted {evals} evaluations (error {error:e})"),
                best: value,
            });
        }
        let (worst, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("non-empty panel list");
        let (pa, pb, _, _) = panels.swap_remove(worst);
        let m = 0.5 * (pa + pb);
        let (v1, e1) = gk15(&mut f, pa, m);
        let (v2, e2) = gk15(&mut f, m, pb);
        evals += 30;
        panels.push((pa, m, v1, e1));
        panels.push((m, pb, v2, e2));
    }
}

/// ∫₀^∞ f(q) dq.
///
/// Gauss–Kronrod maps q = t/(1−t) onto [0, 1); the double-exponential scheme
/// uses the exp-sinh substitution q = exp(π/2·sinh t).
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(
    mut f: F,
    spec: &QuadratureSpec,
) -> Result<Integral> {
    spec.validate()?;
    match spec.scheme {
        Scheme::GaussKronrod => integrate_finite(
            |t: f64| {
                if t >= 1.0 {
                    return 0.0;
                }
                let s = 1.0 - t;
                let v = f(t / s) / (s * s);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            0.0,
            1.0,
            spec,
        ),
        Scheme::DoubleExponential => exp_sinh(f, spec),
    }
}

fn exp_sinh<F: FnMut(f64) -> f64>(mut f: F, spec: &QuadratureSpec) -> Result<Integral> {
    use std::f64::consts::FRAC_PI_2;
    let t_max = 4.5;
    let node = |t: f64| {
        let x = (FRAC_PI_2 * t.sinh()).exp();
        let w = FRAC_PI_2 * t.cosh() * x;
        (x, w)
    };
    let eval = |t: f64, f: &mut F| {
        let (x, w) = node(t);
        if !x.is_finite() || x == 0.0 {
            return 0.0;
        }
        let v = f(x) * w;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    let mut h = 0.5;
    let mut sum = eval(0.0, &mut f);
    let mut evals = 1;
    let mut k = 1;
    while (k as f64) * h <= t_max {
        let t = k as f64 * h;
        sum += eval(t, &mut f) + eval(-t, &mut f);
        evals += 2;
        k += 1;
    }
    let mut estimate = sum * h;
    let mut error = f64::INFINITY;
    for _level in 0..12 {
        h *= 0.5;
        let mut add = 0.0;
        let mut k = 1;
        while (k as f64) * h <= t_max {
            let t = k as f64 * h;
            add += eval(t, &mut f) + eval(-t, &mut f);
            evals += 2;
            k += 2;
        }
        sum += add;
        let next = sum * h;
        error = (next - estimate).abs();
        estimate = next;
        if error <= (spec.rel_tol * estimate.abs()).max(spec.abs_tol) {
            // the DE error decays doubly exponentially; the last difference
            // overstates the error of the refined value
            return Ok(Integral {
                value: estimate,
                error,
                evals,
            });
        }
        if evals > spec.max_evals {
            break;
        }
    }
    Err(Error::NonConvergence {
        message: format!("double-exponential quadrature did not settle (error {error:e})"),
        best: estimate,
    })
}

/// Gauss–Legendre nodes and weights on [−1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..(n + 1) / 2 {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 0 { 1.0 } else if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_polynomial_exact() {
        let spec = QuadratureSpec::default();
        let r = integrate_finite(|x| x * x * x - 2.0 * x, 0.0, 2.0 + 1.0, &spec).unwrap();
        assert!((r.value - 11.25).abs() < 1e-13);
    }

    #[test]
    fn gauss_legendre_moments() {
        let (x, w) = gauss_legendre(12);
        let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(22)).sum();
        assert!((m - 2.0 / 23.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_spec() {
        let mut spec = QuadratureSpec::default();
        spec.max_evals = 10;
        assert!(integrate_semi_infinite(|q| (-q).exp(), &spec).is_err());
    }
}
