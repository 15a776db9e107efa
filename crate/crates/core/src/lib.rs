//! Tomographic probability representations of charged quantum particles in
//! electromagnetic fields: gauge-independent Wigner functions and tomograms,
//! gauge kernels, propagators and tomographic evolution-equation checks.

pub mod error;
pub mod evolution;
pub mod fields;
pub mod gauge_kernels;
pub mod numerics;
pub mod states;
pub mod tomography;
pub mod units;
pub mod wigner;

pub use error::{Error, Result};
pub use units::UnitsContext;
