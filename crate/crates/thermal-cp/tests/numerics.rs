use std::f64::consts::PI;

use proptest::prelude::*;
use thermal_cp::numerics::{
    bessel_i_ratios, bessel_modified, bessel_modified_scaled, integrate_finite, integrate_semi_infinite, matsubara_spacing,
    matsubara_sum, photon_number, MatsubaraPolicy, QuadratureSpec, Scheme,
};
use thermal_cp::units::thermal_energy;

/// I_m(x) = (1/π)∫₀^π e^{x cos θ} cos mθ dθ; the trapezoid rule is spectrally
/// accurate for this periodic integrand.
fn i_oracle(m: usize, x: f64) -> f64 {
    let n = 4000;
    let h = PI / n as f64;
    let f = |t: f64| (x * (t.cos() - 1.0)).exp() * (m as f64 * t).cos();
    let s: f64 = (1..n).map(|k| f(k as f64 * h)).sum::<f64>() + 0.5 * (f(0.0) + f(PI));
    s * h / PI * x.exp()
}

/// K_m(x) = ∫₀^∞ e^{−x cosh t} cosh mt dt.
fn k_oracle(m: usize, x: f64) -> f64 {
    let h = 1e-3;
    let mut s = 0.5 * (-x).exp();
    let mut t: f64 = h;
    loop {
        let v = (-x * t.cosh() + m as f64 * t).exp() * 0.5 * (1.0 + (-2.0 * m as f64 * t).exp());
        s += v;
        if v < 1e-300 || (v < 1e-18 * s && t > 1.0) {
            break;
        }
        t += h;
    }
    s * h
}

#[test]
fn bessel_against_integral_representations() {
    for (m, x) in [(0, 0.05), (0, 1.0), (1, 2.5), (3, 0.7), (7, 12.0), (12, 30.0)] {
        let b = bessel_modified(m, x).unwrap();
        let (i, k) = (i_oracle(m, x), k_oracle(m, x));
        assert!((b.i / i - 1.0).abs() < 1e-11, "I_{m}({x}) {} {i}", b.i);
        assert!((b.k / k - 1.0).abs() < 1e-11, "K_{m}({x}) {} {k}", b.k);
    }
}

#[test]
fn ratio_recurrence_matches_table() {
    let x = 3.7;
    let h = bessel_i_ratios(20, x).unwrap();
    for m in 0..20 {
        let want = bessel_modified(m + 1, x).unwrap().i / bessel_modified(m, x).unwrap().i;
        assert!((h[m] / want - 1.0).abs() < 1e-12);
    }
}

#[test]
fn quadrature_known_integrals() {
    let spec = QuadratureSpec::new(Scheme::GaussKronrod, 1e-12);
    let v = integrate_finite(|x: f64| 1.0 / (1.0 + x * x), 0.0, 1.0, &spec).unwrap();
    assert!((v.value - PI / 4.0).abs() < 1e-13);
    for scheme in [Scheme::GaussKronrod, Scheme::DoubleExponential] {
        let spec = QuadratureSpec::new(scheme, 1e-12);
        let v = integrate_semi_infinite(|x: f64| 1.0 / (1.0 + x * x), &spec).unwrap();
        assert!((v.value - PI / 2.0).abs() < 1e-10, "{scheme:?} {}", v.value);
    }
}

#[test]
fn matsubara_spacing_is_linear_in_temperature() {
    let a = matsubara_spacing(150.0).unwrap();
    let b = matsubara_spacing(300.0).unwrap();
    assert!((b / a - 2.0).abs() < 1e-15);
    assert!(matsubara_spacing(-1.0).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wronskian(m in 0usize..60, x in 1e-3f64..200.0) {
        let b = bessel_modified_scaled(m, x).unwrap();
        // scaling cancels in I K' − I' K = −1/x
        let w = b.i * b.kp - b.ip * b.k;
        prop_assert!((x * w + 1.0).abs() < 1e-10, "x W + 1 = {}", x * w + 1.0);
    }

    #[test]
    fn recurrence(m in 1usize..40, x in 0.1f64..100.0) {
        let lo = bessel_modified_scaled(m - 1, x).unwrap();
        let mid = bessel_modified_scaled(m, x).unwrap();
        let hi = bessel_modified_scaled(m + 1, x).unwrap();
        // K_{m+1} = K_{m−1} + (2m/x) K_m
        let k = lo.k + 2.0 * m as f64 / x * mid.k;
        prop_assert!((hi.k / k - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coth_identity(t in 4.0f64..600.0, w in 1e-3f64..1.0) {
        let policy = MatsubaraPolicy::default();
        let s = matsubara_sum(t, &policy, |_, xi| Ok(w * w / (w * w + xi * xi))).unwrap();
        let lhs = 4.0 * thermal_energy(t) / w * s.value;
        let coth = 1.0 / (w / (2.0 * thermal_energy(t))).tanh();
        prop_assert!((lhs / coth - 1.0).abs() < 1e-6, "{} {}", lhs, coth);
        let n = photon_number(w, t).unwrap();
        prop_assert!((2.0 * n + 1.0 - coth).abs() < 1e-12 * coth);
    }

    #[test]
    fn gauss_kronrod_integrates_monomials(p in 0i32..12, b in 0.1f64..3.0) {
        let v = integrate_finite(|x: f64| x.powi(p), 0.0, b, &QuadratureSpec::default()).unwrap();
        let want = b.powi(p + 1) / (p + 1) as f64;
        prop_assert!((v.value / want - 1.0).abs() < 1e-12);
    }
}
