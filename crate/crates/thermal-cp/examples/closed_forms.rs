//! Perfect-conductor closed forms and the linear-T correction constants.

use thermal_cp::closed_forms::{
    correction_ratios, cylinder_trace_gamma0, plate_gamma0, sphere_trace_gamma0, CylinderOptions, GeometryClass, MSum,
};
use thermal_cp::materials::Material;

fn main() -> thermal_cp::Result<()> {
    println!("plate:    Tr Γ₀ z³ = {:.9}", plate_gamma0(1.0)?.trace().re);
    for r in [1.5, 2.0, 4.0] {
        println!("sphere:   r/R = {r}: Tr Γ₀ R³ = {:.9}", sphere_trace_gamma0(r, 1.0)?);
    }
    for convention in [MSum::HalfZero, MSum::FullZero, MSum::Symmetric] {
        let opts = CylinderOptions {
            convention,
            ..Default::default()
        };
        let row: Vec<String> = [0.0, 0.5, 0.9]
            .iter()
            .map(|&rho| cylinder_trace_gamma0(rho, 1.0, &opts).map(|v| format!("{v:.6}")))
            .collect::<thermal_cp::Result<_>>()?;
        println!("cylinder: {:<12} Tr Γ₀ R³ at ρ/R = 0, 0.5, 0.9: {}", convention.tag(), row.join(", "));
    }
    let gold = Material::gold();
    for g in [
        GeometryClass::SphereExternal {
            radius: 5000.0,
            distance: 5000.0,
        },
        GeometryClass::Plate { distance: 5000.0 },
        GeometryClass::SphericalCavity { radius: 5000.0 },
    ] {
        let (c_ret, c_refl) = g.constants()?;
        let c = correction_ratios(&g, 1e-3, 300.0, &gold)?;
        println!(
            "{:<17} c_retard {c_ret:+.4}, c_refl {c_refl:.4}: ΔU/U₀ = {:+.4e} (retardation) {:+.4e} (reflectivity)",
            g.tag(),
            c.retardation,
            c.reflectivity
        );
    }
    Ok(())
}
