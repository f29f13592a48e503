//! Data-driven solver for stationary viscous fluid mechanics on the
//! periodic torus.
//!
//! Instead of a constitutive law, the solver minimizes the integrated
//! phase-space distance of strain/viscous-stress fields to a finite
//! material data set, subject to the exact differential constraints of
//! (Navier–)Stokes flow, realized mode-by-mode in Fourier space.

pub mod dataset;
pub mod error;
pub mod hulls;
pub mod phase;
pub mod solver;
pub mod spectral;

pub use error::{Error, Result};
pub use phase::{dist_pq, inner, metric_d, young_defect, Dim, Exponents, PhasePoint, TracelessSym};
