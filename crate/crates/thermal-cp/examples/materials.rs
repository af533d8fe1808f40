//! Drude gold on both frequency axes, its Born strength and surface factor.

use num_complex::Complex64;
use thermal_cp::materials::{born_strength, drude_surface_factor, permittivity, Material};

fn main() -> thermal_cp::Result<()> {
    let gold = Material::gold();
    println!("{:>12} {:>24} {:>24} {:>12}", "ħω [eV]", "ε(ω)", "u(ω)", "Re[i/√ε]");
    for w in [1e-4, 1e-3, 1e-2, 0.1, 1.0] {
        let eps = permittivity(&gold, Complex64::new(w, 0.0))?.finite().unwrap();
        let u = born_strength(&gold, Complex64::new(w, 0.0))?;
        let s = drude_surface_factor(&gold, w)?;
        println!("{w:>12.1e} {:>24.4} {:>24.6} {:>12.4e}", eps, u, s.exact);
    }
    let xi = Complex64::new(0.0, 0.16);
    let eps = permittivity(&gold, xi)?.finite().unwrap();
    println!("ε(iξ) at ħξ = 0.16 eV: {:.4}", eps.re);
    Ok(())
}
