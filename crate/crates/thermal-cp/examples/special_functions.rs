//! Modified Bessel functions and the adaptive quadratures.

use thermal_cp::numerics::{bessel_modified, bessel_table, integrate_finite, integrate_semi_infinite, QuadratureSpec, Scheme};

fn main() -> thermal_cp::Result<()> {
    for (m, x) in [(0, 0.1), (1, 1.0), (5, 10.0), (20, 50.0)] {
        let b = bessel_modified(m, x)?;
        // Wronskian: I_m K_m' − I_m' K_m = −1/x
        let w = b.i * b.kp - b.ip * b.k;
        println!("m = {m:>2}, x = {x:>5}: I = {:.6e}  K = {:.6e}  x·W + 1 = {:.1e}", b.i, b.k, x * w + 1.0);
    }
    let t = bessel_table(40, 300.0, true)?;
    println!("scaled e^-x I_40(300) = {:.10e}", t.i[40]);

    let spec = QuadratureSpec::default();
    let sine = integrate_finite(f64::sin, 0.0, std::f64::consts::PI, &spec)?;
    println!("∫ sin on [0, π] = {:.15} ({} evaluations)", sine.value, sine.evals);
    for scheme in [Scheme::GaussKronrod, Scheme::DoubleExponential] {
        let g = integrate_semi_infinite(|q: f64| (-q * q).exp(), &QuadratureSpec::new(scheme, 1e-12))?;
        println!("{scheme:?}: ∫ e^(-q²) on [0, ∞) = {:.15}", g.value);
    }
    Ok(())
}
