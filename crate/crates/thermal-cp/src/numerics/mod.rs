//! Special functions, quadrature and Matsubara utilities.

pub mod bessel;
pub mod matsubara;
pub mod quadrature;

pub use bessel::{bessel_i_ratios, bessel_modified, bessel_modified_scaled, bessel_table, BesselIK, BesselTable};
pub use matsubara::{
    matsubara_frequencies, matsubara_spacing, matsubara_sum, photon_number, primed_weight,
    MatsubaraPolicy, MatsubaraSum, TailEstimate,
};
pub use quadrature::{gauss_legendre, integrate_finite, integrate_semi_infinite, Integral, QuadratureSpec, Scheme};
