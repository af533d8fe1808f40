//! Matsubara frequencies and the primed sum behind coth(ħω/2k_BT).

use thermal_cp::numerics::{matsubara_spacing, matsubara_sum, photon_number, MatsubaraPolicy};
use thermal_cp::units::thermal_energy;

fn main() -> thermal_cp::Result<()> {
    let policy = MatsubaraPolicy::default();
    let w = 0.02;
    for t in [4.0, 77.0, 300.0, 600.0] {
        println!("T = {t:>5} K: ħξ_1 = {:.6} eV", matsubara_spacing(t)?);
        // (4k_BT/ħω) Σ'_j ω²/(ω² + ξ_j²) = coth(ħω/2k_BT)
        let s = matsubara_sum(t, &policy, |_, xi| Ok(w * w / (w * w + xi * xi)))?;
        let lhs = 4.0 * thermal_energy(t) / w * s.value;
        let rhs = 2.0 * photon_number(w, t)? + 1.0;
        println!("           coth identity: {lhs:.10} vs {rhs:.10} ({} terms)", s.terms);
    }
    Ok(())
}
