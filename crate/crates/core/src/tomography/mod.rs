//! Symplectic, optical and probability tomograms, their dequantizer and
//! quantizer kernels, and reconstruction of states from tomogram families.

pub(crate) mod kernels;
mod radon;
mod reconstruct;

pub use kernels::{dequantizer_matrix, quantizer_matrix, tomogram_via_dequantizer, KernelKind, KernelOperator};
pub use radon::{compute_tomogram, default_x_grid, radon_transform, TomogramOptions};
pub use reconstruct::{
    characteristic_value, reconstruct_density, reconstruct_wigner_from_probability, reconstruct_wigner_unit_sphere,
    sample_family, sample_unit_sphere_family, ParameterGrid, Reconstruction, TomogramFamily, UnitSphereFamily,
    UnitSphereGrid, MIN_FIDELITY,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::Grid;
use crate::units::UnitsContext;

/// Parameters selecting one tomographic section.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "snake_case")]
pub enum TomographyParams {
    /// One `x` per axis, `x_s = mu_s q_s + nu_s p_s`.
    Symplectic { mu: Vec<f64>, nu: Vec<f64> },
    /// `mu_s = cos theta_s`, `nu_s = sin theta_s / (m omega)`.
    Optical { theta: Vec<f64> },
    /// Scalar `x = mu . q + nu . p`.
    Probability { mu: Vec<f64>, nu: Vec<f64> },
    /// Scalar `x` along the unit direction of `2D - 1` angles in `(q, p / m omega)` space.
    UnitSphere { xi: Vec<f64> },
}

impl TomographyParams {
    pub fn dim(&self) -> usize {
        match self {
            Self::Symplectic { mu, .. } | Self::Probability { mu, .. } => mu.len(),
            Self::Optical { theta } => theta.len(),
            Self::UnitSphere { xi } => xi.len().div_ceil(2),
        }
    }

    /// True when the tomogram has a single scalar `x`.
    pub fn scalar_x(&self) -> bool {
        matches!(self, Self::Probability { .. } | Self::UnitSphere { .. })
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Symplectic { mu, nu } | Self::Probability { mu, nu } => {
                if mu.is_empty() || mu.len() > 3 || mu.len() != nu.len() {
                    return Err(Error::InvalidArgument("mu and nu need one entry per axis (1 to 3)".into()));
                }
                if mu.iter().chain(nu).any(|v| !v.is_finite()) {
                    return Err(Error::InvalidArgument("non-finite tomography parameter".into()));
                }
                if matches!(self, Self::Symplectic { .. }) {
                    if let Some(s) = (0..mu.len()).find(|&s| mu[s] == 0.0 && nu[s] == 0.0) {
                        return Err(Error::InvalidArgument(format!("axis {s}: mu = nu = 0 is a degenerate observable")));
                    }
                } else if mu.iter().chain(nu).all(|v| *v == 0.0) {
                    return Err(Error::InvalidArgument("mu = nu = 0 is a degenerate observable".into()));
                }
            }
            Self::Optical { theta } => {
                if theta.is_empty() || theta.len() > 3 || theta.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidArgument("theta needs 1 to 3 finite angles".into()));
                }
            }
            Self::UnitSphere { xi } => {
                if xi.len() % 2 == 0 || xi.len() > 5 || xi.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidArgument("xi needs 2D - 1 finite angles".into()));
                }
            }
        }
        Ok(())
    }

    /// `(mu, nu)` of the equivalent symplectic or probability section.
    pub fn symplectic_form(&self, units: &UnitsContext) -> (Vec<f64>, Vec<f64>) {
        let mw = units.m * units.omega;
        match self {
            Self::Symplectic { mu, nu } | Self::Probability { mu, nu } => (mu.clone(), nu.clone()),
            Self::Optical { theta } => (theta.iter().map(|t| t.cos()).collect(), theta.iter().map(|t| t.sin() / mw).collect()),
            Self::UnitSphere { xi } => {
                let (mu, nt) = unit_sphere_direction(xi);
                (mu, nt.iter().map(|v| v / mw).collect())
            }
        }
    }

    /// Same section with every `mu` and `nu` multiplied by `r` (`Symplectic` and `Probability` only).
    pub fn scaled(&self, r: f64) -> Result<Self> {
        match self {
            Self::Symplectic { mu, nu } => Ok(Self::Symplectic {
                mu: mu.iter().map(|v| v * r).collect(),
                nu: nu.iter().map(|v| v * r).collect(),
            }),
            Self::Probability { mu, nu } => Ok(Self::Probability {
                mu: mu.iter().map(|v| v * r).collect(),
                nu: nu.iter().map(|v| v * r).collect(),
            }),
            _ => Err(Error::Unsupported("only mu/nu parametrizations can be rescaled".into())),
        }
    }
}

/// Unit vector `(mu, nu_tilde)` in `2D` dimensions from its `2D - 1` directional angles.
///
/// Component 1 is `sin xi_1 prod_{k>=2} sin xi_k`, component `j >= 2` is
/// `cos xi_{j-1} prod_{k>=j} sin xi_k`.
pub fn unit_sphere_direction(xi: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = xi.len() + 1;
    let mut v = vec![0.0; n];
    for (j, vj) in v.iter_mut().enumerate() {
        let mut tail = 1.0;
        for x in &xi[j.max(1)..] {
            tail *= x.sin();
        }
        *vj = if j == 0 { xi[0].sin() * tail } else { xi[j - 1].cos() * tail };
    }
    let d = n / 2;
    let nu = v.split_off(d);
    (v, nu)
}

/// Whether a tomogram is built on canonical or kinetic momentum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GaugeKind {
    Ordinary,
    GaugeIndependent,
}

/// Tomogram samples on an `x` grid (one axis per degree of freedom, or one
/// axis for scalar schemes).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tomogram {
    pub params: TomographyParams,
    pub x_grid: Grid,
    pub values: Vec<f64>,
    pub gauge_kind: GaugeKind,
    pub time: f64,
    /// Integral before the post-hoc normalization.
    pub normalization_factor: f64,
}

impl Tomogram {
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.x_grid.cell_volume()
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `int |M1 - M2| dx` on a shared grid.
    pub fn l1_distance(&self, other: &Tomogram) -> Result<f64> {
        if !self.x_grid.same_shape(&other.x_grid) {
            return Err(Error::GridMismatch("tomogram x grids differ".into()));
        }
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum::<f64>() * self.x_grid.cell_volume())
    }
}
