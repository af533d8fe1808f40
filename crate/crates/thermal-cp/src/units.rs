//! Physical constants and unit conversions.

/// ħc in eV·nm.
pub const HBAR_C: f64 = 197.326_980_4;

/// Boltzmann constant in eV/K.
pub const K_B: f64 = 8.617_333e-5;

const SPEED_OF_LIGHT: f64 = 299_792_458.0;
const VACUUM_PERMEABILITY: f64 = 1.256_637_062_12e-6;
const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;

/// 1 Debye in C·m (exactly 10⁻²¹/c).
pub const DEBYE: f64 = 1e-21 / SPEED_OF_LIGHT;

/// D²/ε₀ expressed in eV·nm³.
///
/// With D = 10⁻²¹/c C·m one has D²/ε₀ = 10⁻⁴² μ₀ J·m³.
pub const DEBYE2_PER_EPS0: f64 = 1e-42 * VACUUM_PERMEABILITY / ELEMENTARY_CHARGE * 1e27;

/// Thermal energy k_B T in eV.
pub fn thermal_energy(temperature: f64) -> f64 {
    K_B * temperature
}

/// Wavenumber k = ω/c in nm⁻¹ for a photon energy ħω in eV.
pub fn wavenumber(hbar_omega: f64) -> f64 {
    hbar_omega / HBAR_C
}

/// Photon energy ħω in eV whose wavenumber times `length` equals `kl`.
pub fn energy_for_kl(kl: f64, length: f64) -> f64 {
    kl * HBAR_C / length
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn debye_combination() {
        let d = 3.335_640_951_98e-30;
        let eps0 = 8.854_187_8128e-12;
        let direct = d * d / eps0 / ELEMENTARY_CHARGE * 1e27;
        assert!((DEBYE2_PER_EPS0 / direct - 1.0).abs() < 1e-9);
        assert!((DEBYE2_PER_EPS0 - 7.843_31e-3).abs() < 1e-8);
    }

    #[test]
    fn kl_round_trip() {
        let e = energy_for_kl(0.01, 5000.0);
        assert!((wavenumber(e) * 5000.0 - 0.01).abs() < 1e-15);
    }
}
