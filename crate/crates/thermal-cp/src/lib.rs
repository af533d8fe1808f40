//! Thermal Casimir-Polder potentials of particles in energy eigenstates near
//! conducting bodies.
//!
//! Energies are in eV (frequencies are stored as ħω), lengths in nm,
//! temperatures in K and dipole moments in Debye. Green tensors carry units of
//! nm⁻³ with the 1/(4π) of the dipole kernel included.

pub mod born_solver;
pub mod cli;
pub mod closed_forms;
pub mod criteria;
mod error;
pub mod materials;
pub mod numerics;
pub mod scene;
pub mod table;
pub mod thermal;
pub mod units;

pub use error::{Error, Result};
