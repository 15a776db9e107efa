//! Left-minus-right residuals of the tomographic evolution equations on known
//! trajectories, and refinement studies of those residuals.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::algebra::{Evaluator, LatticeSource, OperatorExpr};
use super::classical::GaussianPhaseDensity;
use super::correspondence::{equation_operator, EquationId, FieldModel, Representation};
use super::propagate::{schrodinger_propagate, Hamiltonian, PropagatorConfig};
use crate::error::{Error, Result};
use crate::fields::{AffineField, FieldSpec, Potentials};
use crate::numerics::{Axis, Grid};
use crate::states::{gaussian_packet, WaveFunction};
use crate::tomography::{radon_transform, TomogramOptions, TomographyParams};
use crate::units::UnitsContext;
use crate::wigner::{gauge_independent_wigner, wigner_transform, PhaseSpaceFunction};

/// Tomograms of one trajectory at uniformly spaced sample times.
pub trait TomogramTrajectory: Sync {
    fn dim(&self) -> usize;
    fn times(&self) -> &[f64];
    fn tomogram(&self, k: usize, params: &TomographyParams, x_grid: &Grid) -> Result<Vec<f64>>;
}

/// Radon transforms of the Wigner functions of a sampled quantum trajectory.
pub struct QuantumTrajectory {
    wigners: Vec<PhaseSpaceFunction>,
    times: Vec<f64>,
    opts: TomogramOptions,
}

impl QuantumTrajectory {
    /// Canonical-momentum tomograms when `a_for_tomograms` is `None`,
    /// gauge-independent ones built with it otherwise.
    pub fn new(states: &[WaveFunction], a_for_tomograms: Option<&Potentials>, units: &UnitsContext) -> Result<Self> {
        let mut wigners = Vec::with_capacity(states.len());
        let mut times = Vec::with_capacity(states.len());
        for s in states {
            times.push(s.time);
            wigners.push(match a_for_tomograms {
                Some(a) => gauge_independent_wigner(s, a, s.time, units)?,
                None => wigner_transform(s, units)?,
            });
        }
        Ok(Self { wigners, times, opts: TomogramOptions::default() })
    }
}

impl TomogramTrajectory for QuantumTrajectory {
    fn dim(&self) -> usize {
        self.wigners[0].dim()
    }
    fn times(&self) -> &[f64] {
        &self.times
    }
    fn tomogram(&self, k: usize, params: &TomographyParams, x_grid: &Grid) -> Result<Vec<f64>> {
        Ok(radon_transform(&self.wigners[k], params, Some(x_grid), &self.opts)?.values)
    }
}

/// Exact tomograms of a Gaussian density transported by static affine fields.
pub struct GaussianTrajectory {
    pub initial: GaussianPhaseDensity,
    pub field: AffineField,
    pub t0: f64,
    pub times: Vec<f64>,
    pub units: UnitsContext,
    /// `eA/c = shift + jac q`; when set, tomograms use the canonical momentum.
    pub canonical: Option<(Vec<f64>, Vec<Vec<f64>>)>,
}

impl TomogramTrajectory for GaussianTrajectory {
    fn dim(&self) -> usize {
        self.initial.dim
    }
    fn times(&self) -> &[f64] {
        &self.times
    }
    fn tomogram(&self, k: usize, params: &TomographyParams, x_grid: &Grid) -> Result<Vec<f64>> {
        let mut g = self.initial.flow(&self.field, self.times[k] - self.t0, &self.units);
        if let Some((shift, jac)) = &self.canonical {
            g = g.momentum_shift(shift, jac);
        }
        Ok(g.tomogram(params, x_grid, &self.units)?.values)
    }
}

/// Tomography parameters from a flat parameter vector of a representation.
pub fn params_from_vector(rep: Representation, dim: usize, v: &[f64]) -> TomographyParams {
    match rep {
        Representation::Optical => TomographyParams::Optical { theta: v.to_vec() },
        Representation::Symplectic => TomographyParams::Symplectic { mu: v[..dim].to_vec(), nu: v[dim..].to_vec() },
        Representation::Probability => TomographyParams::Probability { mu: v[..dim].to_vec(), nu: v[dim..].to_vec() },
    }
}

struct TrajectoryLattice<'a> {
    traj: &'a dyn TomogramTrajectory,
    k: usize,
    rep: Representation,
    x_grid: &'a Grid,
    centre: Vec<f64>,
    step: Vec<f64>,
}

impl LatticeSource for TrajectoryLattice<'_> {
    fn x_grid(&self) -> &Grid {
        self.x_grid
    }
    fn centre(&self) -> &[f64] {
        &self.centre
    }
    fn step(&self) -> &[f64] {
        &self.step
    }
    fn sample(&self, offset: &[i32]) -> Result<Vec<Complex64>> {
        let v: Vec<f64> = self.centre.iter().zip(offset).zip(&self.step).map(|((c, o), h)| c + *o as f64 * h).collect();
        let p = params_from_vector(self.rep, self.traj.dim(), &v);
        Ok(self.traj.tomogram(self.k, &p, self.x_grid)?.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
    }
}

/// Where the residual is sampled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualSettings {
    /// Parameter vectors (`mu` then `nu`, or `theta`) at which both sides are compared.
    pub centres: Vec<Vec<f64>>,
    /// Lattice step of the parameter derivatives.
    pub param_step: f64,
    /// One axis per degree of freedom, or one axis for the probability scheme.
    pub x_grid: Grid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub h: f64,
    pub dt: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub equation: EquationId,
    pub representation: Representation,
    /// Times at which the residual was evaluated.
    pub times: Vec<f64>,
    /// `L^2` norm of left minus right side over x and the parameter centres.
    pub residuals: Vec<f64>,
    /// Residual relative to the `L^2` norm of the time derivative.
    pub relative: Vec<f64>,
    pub refinement: Vec<RefinementRow>,
    /// Least-squares slope of `log residual` against `log h`.
    pub order: Option<f64>,
    pub field_class: String,
}

impl ResidualReport {
    /// Root mean square over the evaluation times.
    pub fn rms(&self) -> f64 {
        (self.residuals.iter().map(|r| r * r).sum::<f64>() / self.residuals.len().max(1) as f64).sqrt()
    }

    pub fn is_monotone(&self) -> bool {
        self.refinement.windows(2).all(|w| w[1].residual < w[0].residual)
    }
}

const FD4: [(i32, f64); 4] = [(-2, 1.0 / 12.0), (-1, -8.0 / 12.0), (1, 8.0 / 12.0), (2, -1.0 / 12.0)];

const FIELD_NOTE: &str = "affine E and constant B: the tau-averaged field arguments reduce to first-order correspondence operators";

fn uniform_step(times: &[f64]) -> Result<f64> {
    if times.len() < 5 {
        return Err(Error::InvalidArgument(format!("need at least 5 sample times, got {}", times.len())));
    }
    let dt = (times[times.len() - 1] - times[0]) / (times.len() - 1) as f64;
    if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * dt) {
        return Err(Error::InvalidArgument("sample times must be uniformly spaced and increasing".into()));
    }
    Ok(dt)
}

/// Compare both sides of `eq` on a trajectory at every time with two samples on
/// each side. `potentials` must have affine `E` and constant `B`.
pub fn tomographic_residual(
    traj: &dyn TomogramTrajectory,
    eq: EquationId,
    potentials: &Potentials,
    settings: &ResidualSettings,
    units: &UnitsContext,
) -> Result<ResidualReport> {
    let dim = traj.dim();
    let rep = eq.representation();
    let times = traj.times().to_vec();
    let dt = uniform_step(&times)?;
    if potentials.dim() != dim {
        return Err(Error::GridMismatch("potentials and trajectory differ in dimension".into()));
    }
    if settings.x_grid.dim() != rep.x_axes(dim) {
        return Err(Error::GridMismatch(format!("{rep:?} tomograms need {} x axes", rep.x_axes(dim))));
    }
    let np = rep.param_count(dim);
    if settings.centres.is_empty() || settings.centres.iter().any(|c| c.len() != np) {
        return Err(Error::InvalidArgument(format!("every centre needs {np} parameters")));
    }
    if !(settings.param_step > 0.0) {
        return Err(Error::InvalidArgument("parameter step must be positive".into()));
    }
    let static_model = if eq.canonical() {
        None
    } else {
        let field = potentials.affine.ok_or_else(|| {
            Error::UnsupportedField(format!("{eq:?} residuals need {FIELD_NOTE}; this field is not of that class"))
        })?;
        Some(FieldModel::from_field(dim, field))
    };
    let dv = settings.x_grid.cell_volume();
    let mut out_t = Vec::new();
    let mut res = Vec::new();
    let mut rel = Vec::new();
    for k in 2..times.len() - 2 {
        let model = match &static_model {
            Some(m) => m.clone(),
            None => FieldModel::from_potentials(potentials, times[k])?,
        };
        let op: OperatorExpr = equation_operator(eq, &model, units)?;
        let scale = op.terms.values().map(|c| c.norm()).fold(0.0, f64::max);
        let op = op.pruned(1e-14 * scale);
        let (mut r2, mut n2) = (0.0, 0.0);
        for centre in &settings.centres {
            let lattice = TrajectoryLattice {
                traj,
                k,
                rep,
                x_grid: &settings.x_grid,
                centre: centre.clone(),
                step: vec![settings.param_step; np],
            };
            let p = params_from_vector(rep, dim, centre);
            let mut lhs = vec![0.0; settings.x_grid.len()];
            for (j, w) in FD4 {
                let v = traj.tomogram((k as i32 + j) as usize, &p, &settings.x_grid)?;
                for (a, x) in lhs.iter_mut().zip(v) {
                    *a += w / dt * x;
                }
            }
            let rhs = Evaluator::new(&lattice).eval(&op)?;
            for (l, r) in lhs.iter().zip(&rhs) {
                r2 += (Complex64::new(*l, 0.0) - r).norm_sqr() * dv;
                n2 += l * l * dv;
            }
        }
        out_t.push(times[k]);
        res.push(r2.sqrt());
        rel.push(if n2 > 0.0 { (r2 / n2).sqrt() } else { f64::NAN });
    }
    Ok(ResidualReport {
        equation: eq,
        representation: rep,
        times: out_t,
        residuals: res,
        relative: rel,
        refinement: vec![],
        order: None,
        field_class: FIELD_NOTE.into(),
    })
}

/// Least-squares slope of `log r` against `log h`.
pub fn convergence_order(rows: &[RefinementRow]) -> Option<f64> {
    if rows.len() < 2 || rows.iter().any(|r| !(r.residual > 0.0 && r.h > 0.0)) {
        return None;
    }
    let n = rows.len() as f64;
    let xs: Vec<f64> = rows.iter().map(|r| r.h.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.residual.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    Some(sxy / sxx)
}

/// Which kind of trajectory feeds a refinement study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    /// Crank–Nicolson propagation of a Gaussian packet.
    Quantum,
    /// Exact transport of the packet's Wigner function by the classical flow.
    Classical,
}

/// A refinement study: the trajectory and the residual grids are rebuilt with
/// `(dt, h)` halved at every level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualStudy {
    pub dim: usize,
    pub field: FieldSpec,
    pub equation: EquationId,
    pub trajectory: TrajectoryKind,
    pub q0: Vec<f64>,
    pub p0: Vec<f64>,
    pub sigma: f64,
    /// Time at which both sides are compared.
    pub t_eval: f64,
    /// Sample spacing of the coarsest level.
    pub dt0: f64,
    /// x spacing of the coarsest level; the parameter step is `h`, too.
    pub h0: f64,
    pub levels: usize,
    /// Half-width of the x axes.
    pub x_half_width: f64,
    pub centres: Vec<Vec<f64>>,
    /// State grid of quantum trajectories: points per axis and half-width.
    pub state_points: usize,
    pub state_half_width: f64,
}

fn x_grid_for(rep: Representation, dim: usize, half: f64, h: f64) -> Result<Grid> {
    let n = (2.0 * half / h).round() as usize + 1;
    let axis = Axis::symmetric(half, n)?;
    Grid::new(vec![axis; rep.x_axes(dim)])
}

/// Run one refinement study and return the finest level's report with the
/// refinement table and the order estimate filled in.
pub fn residual_study(study: &ResidualStudy, units: &UnitsContext) -> Result<ResidualReport> {
    if study.levels < 2 {
        return Err(Error::InvalidArgument("a refinement study needs at least two levels".into()));
    }
    let pot = study.field.build(study.dim, units)?;
    let rep = study.equation.representation();
    let mut rows = Vec::new();
    let mut last = None;
    // CN substeps per sample, fixed over the levels so the propagation step halves too
    let substeps = if study.trajectory == TrajectoryKind::Quantum {
        let grid = Grid::uniform(study.dim, study.state_half_width, study.state_points)?;
        let h = Hamiltonian::new(&grid, &pot, 0.0, units)?;
        let budget = 0.45 * units.hbar / h.norm_bound();
        (study.dt0 / budget).ceil().max(1.0) as usize
    } else {
        1
    };
    for level in 0..study.levels {
        let f = 0.5f64.powi(level as i32);
        let (dt, h) = (study.dt0 * f, study.h0 * f);
        let times: Vec<f64> = (-2..=2).map(|j| study.t_eval + j as f64 * dt).collect();
        let settings = ResidualSettings {
            centres: study.centres.clone(),
            param_step: h,
            x_grid: x_grid_for(rep, study.dim, study.x_half_width, h)?,
        };
        let report = match study.trajectory {
            TrajectoryKind::Classical => {
                let field = pot.affine.ok_or_else(|| Error::UnsupportedField(FIELD_NOTE.into()))?;
                let canonical = if study.equation.canonical() {
                    let a = FieldModel::from_potentials(&pot, 0.0)?.a.expect("built from potentials");
                    let k = units.e / units.c;
                    let shift = a.iter().map(|f| k * f.c0).collect();
                    let jac = a.iter().map(|f| f.c1.iter().map(|v| k * v).collect()).collect();
                    Some((shift, jac))
                } else {
                    None
                };
                let traj = GaussianTrajectory {
                    initial: GaussianPhaseDensity::packet(&study.q0, &study.p0, study.sigma, units)?,
                    field,
                    t0: 0.0,
                    times,
                    units: *units,
                    canonical,
                };
                tomographic_residual(&traj, study.equation, &pot, &settings, units)?
            }
            TrajectoryKind::Quantum => {
                let grid = Grid::uniform(study.dim, study.state_half_width, study.state_points)?;
                let psi0 = gaussian_packet(&grid, &study.q0, &study.p0, study.sigma, units)?;
                let states = sample_states(&psi0, &pot, &times, dt / substeps as f64, units)?;
                let a = if study.equation.canonical() { None } else { Some(&pot) };
                let traj = QuantumTrajectory::new(&states, a, units)?;
                tomographic_residual(&traj, study.equation, &pot, &settings, units)?
            }
        };
        rows.push(RefinementRow { h, dt, residual: report.rms() });
        last = Some(report);
    }
    let mut report = last.expect("at least two levels");
    report.order = convergence_order(&rows);
    report.refinement = rows;
    Ok(report)
}

/// Propagate to each of the uniformly spaced `times` with step `dt_prop`.
fn sample_states(
    psi0: &WaveFunction,
    pot: &Potentials,
    times: &[f64],
    dt_prop: f64,
    units: &UnitsContext,
) -> Result<Vec<WaveFunction>> {
    let mut out = Vec::with_capacity(times.len());
    let mut psi = psi0.clone();
    for &t in times {
        let span = t - psi.time;
        if span > 1e-12 {
            let steps = (span / dt_prop).round().max(1.0) as usize;
            let cfg = PropagatorConfig::new(span / steps as f64, steps);
            psi = schrodinger_propagate(&psi, pot, &cfg, units)?;
        }
        out.push(psi.clone());
    }
    Ok(out)
}
