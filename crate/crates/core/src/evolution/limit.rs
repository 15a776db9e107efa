//! Quantum against classical probability tomograms as hbar shrinks, and the
//! gauge dependence of the canonical Wigner function read at kinetic momentum.

use serde::{Deserialize, Serialize};

use super::classical::{liouville_pullback, GaussianPhaseDensity};
use super::propagate::{schrodinger_propagate, Hamiltonian, PropagatorConfig};
use crate::error::{Error, Result};
use crate::fields::{gauge_transform_potentials, FieldSpec, GaugeFunction, GaugeSpec};
use crate::numerics::{Axis, Grid};
use crate::states::{gauge_phase_transform, gaussian_packet};
use crate::tomography::{compute_tomogram, radon_transform, GaugeKind, TomogramOptions, TomographyParams};
use crate::units::UnitsContext;
use crate::wigner::{kinetic_shifted_wigner, WignerOptions};

/// One-dimensional scenario of the study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalLimitScenario {
    pub field: FieldSpec,
    pub q0: f64,
    pub p0: f64,
    /// Packet width is `width_factor * sqrt(hbar)`.
    #[serde(default = "default_width")]
    pub width_factor: f64,
    pub t_final: f64,
    /// Decreasing values of hbar.
    pub hbar_list: Vec<f64>,
    /// Gauge functions whose effect on `W(q, p + eA/c)` is measured.
    pub gauges: Vec<GaugeSpec>,
    /// `(mu, nu)` sections compared.
    pub sections: Vec<(f64, f64)>,
    pub state_points: usize,
    pub half_width: f64,
    /// Momentum half-width of the classical phase-space grid.
    #[serde(default = "default_p_half_width")]
    pub p_half_width: f64,
    #[serde(default = "default_x_points")]
    pub x_points: usize,
    #[serde(default = "default_x_half_width")]
    pub x_half_width: f64,
    /// Characteristic steps of the classical pullback.
    #[serde(default = "default_classical_steps")]
    pub classical_steps: usize,
}

fn default_width() -> f64 {
    std::f64::consts::FRAC_1_SQRT_2
}
fn default_p_half_width() -> f64 {
    8.0
}
fn default_x_points() -> usize {
    401
}
fn default_x_half_width() -> f64 {
    10.0
}
fn default_classical_steps() -> usize {
    500
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalLimitRow {
    pub hbar: f64,
    /// Mean `L^1` distance between quantum and classical probability tomograms.
    pub distance: f64,
    /// `L^1` change of `W(q, p + eA/c)` under each gauge function.
    pub gauge_dependence: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalLimitReport {
    pub rows: Vec<ClassicalLimitRow>,
}

fn decreasing(v: impl Iterator<Item = f64>) -> bool {
    let v: Vec<f64> = v.collect();
    v.windows(2).all(|w| w[1] < w[0])
}

impl ClassicalLimitReport {
    pub fn distance_monotone(&self) -> bool {
        decreasing(self.rows.iter().map(|r| r.distance))
    }

    pub fn gauge_monotone(&self, k: usize) -> bool {
        decreasing(self.rows.iter().map(|r| r.gauge_dependence[k]))
    }

    pub fn max_distance(&self) -> f64 {
        self.rows.iter().map(|r| r.distance).fold(0.0, f64::max)
    }
}

pub fn classical_limit_study(sc: &ClassicalLimitScenario, base: &UnitsContext) -> Result<ClassicalLimitReport> {
    if sc.hbar_list.is_empty() || sc.hbar_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::InvalidArgument("hbar list must be non-empty and strictly decreasing".into()));
    }
    if sc.sections.is_empty() || !(sc.t_final > 0.0) {
        return Err(Error::InvalidArgument("need at least one section and a positive final time".into()));
    }
    let grid = Grid::line(Axis::symmetric(sc.half_width, sc.state_points)?);
    let x_grid = Grid::line(Axis::symmetric(sc.x_half_width, sc.x_points)?);
    let chis = sc.gauges.iter().map(|g| GaugeFunction::from_spec(1, g)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(sc.hbar_list.len());
    for &hbar in &sc.hbar_list {
        let u = base.with_hbar(hbar);
        u.validate()?;
        let pot = sc.field.build(1, &u)?;
        let sigma = sc.width_factor * hbar.sqrt();
        let psi0 = gaussian_packet(&grid, &[sc.q0], &[sc.p0], sigma, &u)?;
        let bound = Hamiltonian::new(&grid, &pot, 0.0, &u)?.norm_bound();
        let steps = (sc.t_final * bound / (0.4 * hbar)).ceil() as usize;
        let psi = schrodinger_propagate(&psi0, &pot, &PropagatorConfig::new(sc.t_final / steps as f64, steps), &u)?;

        let w0 = GaussianPhaseDensity::packet(&[sc.q0], &[sc.p0], sigma, &u)?;
        let qg = Grid::line(Axis::symmetric(sc.half_width, 2 * sc.state_points + 1)?);
        let pg = Grid::line(Axis::symmetric(sc.p_half_width, 2 * sc.state_points + 1)?);
        let w_cl = liouville_pullback(|q, p| w0.density(q, p), &qg, &pg, &pot, 0.0, sc.t_final, sc.classical_steps, &u)?;
        let opts = TomogramOptions::default();
        let mut distance = 0.0;
        for &(mu, nu) in &sc.sections {
            let params = TomographyParams::Probability { mu: vec![mu], nu: vec![nu] };
            let mq = compute_tomogram(&psi, &params, GaugeKind::GaugeIndependent, Some(&pot), Some(&x_grid), &u, &opts)?;
            let mc = radon_transform(&w_cl, &params, Some(&x_grid), &opts)?;
            distance += mq.l1_distance(&mc)? / sc.sections.len() as f64;
        }

        // chords between grid points only: the midpoint reading is then exact for
        // quadratic gauge functions however fast their phase oscillates
        let wopts = WignerOptions { refine: 1, ..WignerOptions::for_dim(1) };
        let w_ref = kinetic_shifted_wigner(&psi, &pot, psi.time, &u, &wopts)?;
        let mut gauge_dependence = Vec::with_capacity(chis.len());
        for chi in &chis {
            let pot_c = gauge_transform_potentials(&pot, chi, &u)?;
            let psi_c = gauge_phase_transform(&psi, chi, psi.time, &u)?;
            let w_c = kinetic_shifted_wigner(&psi_c, &pot_c, psi.time, &u, &wopts)?;
            gauge_dependence.push(w_ref.l1_distance(&w_c)?);
        }
        rows.push(ClassicalLimitRow { hbar, distance, gauge_dependence });
    }
    Ok(ClassicalLimitReport { rows })
}
