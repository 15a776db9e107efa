//! Grids, quadrature, derivatives and the anchored inverse derivative.

pub mod grid;
pub mod linop;
pub mod ops;
pub mod quad;

pub use grid::{Axis, Grid, GridFunction};
pub use linop::LinearGridOperator;
pub use ops::{inverse_derivative, spectral_derivative, DerivativeScheme};
pub use quad::{averaged_potential, gauss_legendre, lagrange_interp, DEFAULT_QUAD_ORDER};
