//! Modified Bessel functions I_m, K_m of integer order and real argument.
//!
//! K_0 and K_1 come from Temme's series (x < 2) or Steed's continued fraction
//! (x ≥ 2); higher K orders follow by upward recurrence. The ratio I'_m/I_m at
//! the top order is a continued fraction, after which I is recurred downward
//! and normalised through the Wronskian I_m K_m' − I_m' K_m = −1/x.

use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;
const MAXIT: usize = 200_000;
const RESCALE: f64 = 1e250;
pub const MAX_ORDER: usize = 200;

/// Values of I_m, I_m', K_m, K_m' at one argument.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselIK {
    pub i: f64,
    pub ip: f64,
    pub k: f64,
    pub kp: f64,
}

/// Orders 0..=m_max at one argument, optionally exponent-scaled.
///
/// When `scaled` is set, `i`/`ip` hold e^{−x}·I and `k`/`kp` hold e^{x}·K.
#[derive(Debug, Clone)]
pub struct BesselTable {
    pub x: f64,
    pub scaled: bool,
    pub i: Vec<f64>,
    pub ip: Vec<f64>,
    pub k: Vec<f64>,
    pub kp: Vec<f64>,
}

impl BesselTable {
    pub fn get(&self, m: usize) -> BesselIK {
        BesselIK {
            i: self.i[m],
            ip: self.ip[m],
            k: self.k[m],
            kp: self.kp[m],
        }
    }
}

/// I_m(x), I_m'(x), K_m(x), K_m'(x).
pub fn bessel_modified(m: usize, x: f64) -> Result<BesselIK> {
    Ok(bessel_table(m, x, false)?.get(m))
}

/// e^{−x}I_m, e^{−x}I_m', e^{x}K_m, e^{x}K_m'.
pub fn bessel_modified_scaled(m: usize, x: f64) -> Result<BesselIK> {
    Ok(bessel_table(m, x, true)?.get(m))
}

/// All orders 0..=m_max at argument x.
pub fn bessel_table(m_max: usize, x: f64, scaled: bool) -> Result<BesselTable> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("Bessel argument must be positive, got {x}")));
    }
    if m_max > MAX_ORDER {
        return Err(Error::domain(format!("Bessel order {m_max} exceeds {MAX_ORDER}")));
    }
    let n = m_max + 1;
    let xi = 1.0 / x;

    // K_0, K_1 (scaled by e^x when requested)
    let (k0, k1) = if x < 2.0 {
        let (a, b) = temme_k01(x);
        if scaled {
            (a * x.exp(), b * x.exp())
        } else {
            (a, b)
        }
    } else {
        steed_k01(x, scaled)?
    };
    let mut k = vec![0.0; n.max(2)];
    k[0] = k0;
    k[1] = k1;
    for l in 1..n.saturating_sub(1) {
        k[l + 1] = k[l - 1] + 2.0 * l as f64 * xi * k[l];
    }
    k.truncate(n);
    let mut kp = vec![0.0; n];
    kp[0] = -k1;
    for l in 1..n {
        kp[l] = -k[l - 1] - l as f64 * xi * k[l];
    }
    if k.iter().chain(kp.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Range(format!(
            "K_{m_max}({x}) overflows; no representable value"
        )));
    }

    // continued fraction for I'_m/I_m at the top order
    let nu = m_max as f64;
    let h = log_derivative_cf(m_max, x)?;

    // unnormalised downward recurrence
    let mut iu = vec![0.0; n];
    let mut ipu = vec![0.0; n];
    iu[m_max] = FPMIN;
    ipu[m_max] = h * FPMIN;
    let mut fact = nu * xi;
    for l in (1..n).rev() {
        let il = fact * iu[l] + ipu[l];
        fact -= xi;
        let ipl = fact * il + iu[l];
        iu[l - 1] = il;
        ipu[l - 1] = ipl;
        if il.abs() > RESCALE {
            for v in iu[l - 1..].iter_mut().chain(ipu[l - 1..].iter_mut()) {
                *v /= RESCALE;
            }
        }
    }

    // Wronskian normalisation at order 0; e^{x}-scaled K yields e^{−x}-scaled I
    let f0 = ipu[0] / iu[0];
    let i0 = xi / (f0 * k[0] - kp[0]);
    let mut i: Vec<f64> = iu.iter().map(|v| v / iu[0] * i0).collect();
    let mut ip: Vec<f64> = ipu.iter().map(|v| v / iu[0] * i0).collect();
    if i.iter().chain(ip.iter()).any(|v| !v.is_finite()) {
        return Err(Error::Range(format!(
            "I_m({x}) overflows; use the scaled variant"
        )));
    }
    // denormal underflow of very high orders is reported as exact zero
    for v in i.iter_mut().chain(ip.iter_mut()) {
        if v.abs() < f64::MIN_POSITIVE {
            *v = 0.0;
        }
    }
    Ok(BesselTable {
        x,
        scaled,
        i,
        ip,
        k,
        kp,
    })
}

/// I'_ν(x)/I_ν(x) by the modified Lentz continued fraction.
fn log_derivative_cf(nu: usize, x: f64) -> Result<f64> {
    let xi = 1.0 / x;
    let nu = nu as f64;
    let mut h = (nu * xi).max(FPMIN);
    let mut b = 2.0 * xi * nu;
    let mut d = 0.0;
    let mut c = h;
    for _ in 0..MAXIT {
        b += 2.0 * xi;
        d = 1.0 / (b + d);
        c = b + 1.0 / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence {
        message: format!("Bessel I ratio continued fraction at x = {x}"),
        best: h,
    })
}

/// Ratios I_{m+1}(x)/I_m(x) for m = 0..=m_max, free of overflow and
/// underflow at any order.
pub fn bessel_i_ratios(m_max: usize, x: f64) -> Result<Vec<f64>> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain(format!("Bessel argument must be positive, got {x}")));
    }
    // I_{N+1}/I_N = I'_N/I_N − N/x loses digits when N ≫ x; start a few
    // orders higher and let the downward recurrence h_{m−1} = 1/(2m/x + h_m)
    // damp the error
    let top = m_max + 32;
    let mut h = vec![0.0; top + 1];
    h[top] = (log_derivative_cf(top, x)? - top as f64 / x).max(0.0);
    for m in (1..=top).rev() {
        h[m - 1] = 1.0 / (2.0 * m as f64 / x + h[m]);
    }
    h.truncate(m_max + 1);
    Ok(h)
}

/// Temme's series for K_0, K_1 at x < 2.
fn temme_k01(x: f64) -> (f64, f64) {
    let x2 = 0.5 * x;
    let d = -x2.ln();
    let mut ff = -EULER_GAMMA + d;
    let mut sum = ff;
    let mut p = 0.5;
    let mut q = 0.5;
    let mut c = 1.0;
    let dd = x2 * x2;
    let mut sum1 = p;
    let mut i = 1.0;
    loop {
        ff = (i * ff + p + q) / (i * i);
        c *= dd / i;
        p /= i;
        q /= i;
        let del = c * ff;
        sum += del;
        let del1 = c * (p - i * ff);
        sum1 += del1;
        if del.abs() < sum.abs() * EPS && del1.abs() < sum1.abs() * EPS {
            break;
        }
        i += 1.0;
    }
    (sum, sum1 * 2.0 / x)
}

/// Steed's continued fraction for K_0, K_1 at x ≥ 2.
fn steed_k01(x: f64, scaled: bool) -> Result<(f64, f64)> {
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let a1 = 0.25;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    let mut converged = false;
    for i in 1..MAXIT {
        let fi = i as f64;
        a -= 2.0 * fi;
        c = -a * c / (fi + 1.0);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh = (b * d - 1.0) * delh;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < EPS {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            message: format!("Steed continued fraction for K at x = {x}"),
            best: s,
        });
    }
    h *= a1;
    let mut k0 = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    if !scaled {
        k0 *= (-x).exp();
    }
    let k1 = k0 * (x + 0.5 - h) / x;
    Ok((k0, k1))
}
