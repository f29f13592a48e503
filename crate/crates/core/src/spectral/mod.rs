//! Discrete fields on the d-torus with paired physical/spectral
//! representations, per-mode constraint characterization and projection.

pub mod fft;
pub mod field;
pub mod grid;
pub mod io;
pub mod ops;
pub mod symbols;

pub use fft::{hermitize, Fft};
pub use field::{Field, SpectralSym, SpectralVec, VelocityPressure};
pub use grid::{Mode, TorusGrid};
pub use ops::{
    convective_force, dealias, divergence_residual, momentum_residual, particular_stress,
    pressure_from_stress, project_strain, project_stress, recover_velocity,
    strain_constraint_defect, sym_grad,
};
pub use symbols::{build_symbols, ModeBasis, SymbolBasis};

/// Admissibility bound for the inertial term: p ≥ 3d/(d+2), strict for
/// the variational theory.
pub fn inertial_exponent_bound(d: usize) -> f64 {
    3.0 * d as f64 / (d as f64 + 2.0)
}
