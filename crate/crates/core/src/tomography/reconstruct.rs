use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::radon::{radon_transform, TomogramOptions};
use super::{quantizer_matrix, unit_sphere_direction, GaugeKind, Tomogram, TomographyParams};
use crate::error::{Error, Result};
use crate::fields::Potentials;
use crate::numerics::{Grid, DEFAULT_QUAD_ORDER};
use crate::states::{DensityMatrix, StateRef};
use crate::units::UnitsContext;
use crate::wigner::{
    gauge_independent_wigner_with, wigner_transform_with, MomentumKind, PhaseSpaceFunction, WignerOptions,
};

/// Reconstructions whose fidelity with a supplied reference falls below this are errors.
pub const MIN_FIDELITY: f64 = 0.9;

/// Largest number of parameter nodes of a family.
const MAX_NODES: usize = 200_000;

/// Nodes summed sequentially before partial sums are merged, fixing the
/// summation order independently of the thread count.
const CHUNK: usize = 32;

/// Uniform Cartesian grid `[-lambda, lambda]` with `points` nodes on every
/// `mu_s` and `nu_s` axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParameterGrid {
    pub lambda: f64,
    pub points: usize,
}

impl Default for ParameterGrid {
    fn default() -> Self {
        Self { lambda: 4.0, points: 33 }
    }
}

impl ParameterGrid {
    pub fn spacing(&self) -> f64 {
        2.0 * self.lambda / (self.points as f64 - 1.0)
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.points).map(|k| -self.lambda + k as f64 * self.spacing()).collect()
    }

    fn weights(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.points).map(|k| if k == 0 || k + 1 == self.points { 0.5 * h } else { h }).collect()
    }
}

/// Tomograms on every node of a parameter grid. The origin carries no tomogram
/// (its characteristic value is the trace, 1).
#[derive(Debug, Clone)]
pub struct TomogramFamily {
    pub dim: usize,
    /// Scalar-x (probability) family rather than per-axis symplectic.
    pub scalar: bool,
    pub grid: ParameterGrid,
    pub mu: Vec<Vec<f64>>,
    pub nu: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub tomograms: Vec<Option<Tomogram>>,
    pub gauge_kind: GaugeKind,
    pub units: UnitsContext,
    pub time: f64,
}

fn state_wigner(
    s: StateRef<'_>,
    a: Option<&Potentials>,
    units: &UnitsContext,
    opts: &TomogramOptions,
) -> Result<PhaseSpaceFunction> {
    let wopts = opts.wigner.unwrap_or_else(|| WignerOptions::for_dim(s.grid().dim()));
    match a {
        Some(a) => gauge_independent_wigner_with(s, a, s.time(), units, &wopts),
        None => wigner_transform_with(s, units, &wopts),
    }
}

/// Samples symplectic (`scalar = false`) or probability (`scalar = true`)
/// tomograms of a state over the parameter grid. With `a` the tomograms are
/// gauge-independent.
pub fn sample_family<'a>(
    state: impl Into<StateRef<'a>>,
    scalar: bool,
    a: Option<&Potentials>,
    grid: ParameterGrid,
    units: &UnitsContext,
    opts: &TomogramOptions,
) -> Result<TomogramFamily> {
    let s = state.into();
    let d = s.grid().dim();
    if grid.points < 2 || !(grid.lambda > 0.0) {
        return Err(Error::InvalidArgument("parameter grid needs lambda > 0 and at least 2 points".into()));
    }
    let count = grid.points.checked_pow(2 * d as u32).unwrap_or(usize::MAX);
    if count > MAX_NODES {
        return Err(Error::MemoryBudget { required: count, budget: MAX_NODES });
    }
    let w = state_wigner(s, a, units, opts)?;
    let axis = grid.nodes();
    let aw = grid.weights();
    let mut mu = Vec::with_capacity(count);
    let mut nu = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for k in 0..count {
        let mut rem = k;
        let mut v = vec![0.0; 2 * d];
        let mut wt = 1.0;
        for c in (0..2 * d).rev() {
            let i = rem % grid.points;
            rem /= grid.points;
            v[c] = axis[i];
            wt *= aw[i];
        }
        let n = v.split_off(d);
        mu.push(v);
        nu.push(n);
        weights.push(wt);
    }
    let tomograms = (0..count)
        .into_par_iter()
        .map(|k| {
            let (m, n) = (&mu[k], &nu[k]);
            if m.iter().chain(n).all(|v| *v == 0.0) {
                return Ok(None);
            }
            // symplectic nodes with a silent axis reduce to the scalar section of the remaining axes
            let degenerate = (0..d).any(|s| m[s] == 0.0 && n[s] == 0.0);
            let params = if scalar || degenerate {
                TomographyParams::Probability { mu: m.clone(), nu: n.clone() }
            } else {
                TomographyParams::Symplectic { mu: m.clone(), nu: n.clone() }
            };
            radon_transform(&w, &params, None, opts).map(Some)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TomogramFamily {
        dim: d,
        scalar,
        grid,
        mu,
        nu,
        weights,
        tomograms,
        gauge_kind: if a.is_some() { GaugeKind::GaugeIndependent } else { GaugeKind::Ordinary },
        units: *units,
        time: s.time(),
    })
}

/// `int M(x) exp(i s sum_k x_k) dx`.
pub fn characteristic_value(t: &Tomogram, s: f64) -> Complex64 {
    let dv = t.x_grid.cell_volume();
    let pts = t.x_grid.points();
    pts.iter()
        .zip(&t.values)
        .map(|(x, v)| Complex64::from_polar(*v, s * x.iter().sum::<f64>()))
        .sum::<Complex64>()
        * dv
}

fn family_characteristics(f: &TomogramFamily) -> Vec<Complex64> {
    let s = f.units.quantizer_frequency();
    f.tomograms
        .par_iter()
        .map(|t| t.as_ref().map_or(Complex64::new(1.0, 0.0), |t| characteristic_value(t, s)))
        .collect()
}

/// Outcome of a density-matrix reconstruction.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub density: DensityMatrix,
    /// Trace before renormalization.
    pub trace_before: f64,
    /// Largest entry change made by hermitization.
    pub hermiticity_correction: f64,
    /// `Tr(rho_ref rho)` when a reference was supplied (the fidelity for a pure reference).
    pub fidelity: Option<f64>,
    pub nodes: usize,
    pub grid: ParameterGrid,
}

/// `rho = sum_nodes D(x, mu, nu) M(x, mu, nu) dx dmu dnu`, with the x integral
/// taken as the characteristic value. The result is hermitized and renormalized;
/// with a reference, fidelity under [`MIN_FIDELITY`] is an error.
pub fn reconstruct_density(
    family: &TomogramFamily,
    a: Option<&Potentials>,
    grid: &Grid,
    reference: Option<&DensityMatrix>,
) -> Result<Reconstruction> {
    if grid.dim() != family.dim {
        return Err(Error::GridMismatch("target grid and family dimensions differ".into()));
    }
    if a.is_some() != (family.gauge_kind == GaugeKind::GaugeIndependent) {
        return Err(Error::InvalidArgument("potentials must be supplied exactly for gauge-independent families".into()));
    }
    let units = family.units;
    let chars = family_characteristics(family);
    let n = grid.len();
    let zero = vec![0.0; if family.scalar { 1 } else { family.dim }];
    let partials: Vec<DMatrix<Complex64>> = (0..chars.len())
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .map(|ks| {
            let mut acc = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
            for &k in ks {
                let params = if family.scalar {
                    TomographyParams::Probability { mu: family.mu[k].clone(), nu: family.nu[k].clone() }
                } else {
                    TomographyParams::Symplectic { mu: family.mu[k].clone(), nu: family.nu[k].clone() }
                };
                let q = quantizer_kernel(grid, &params, &zero, a, family.time, &units)?;
                acc += q * (chars[k] * family.weights[k]);
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut rho = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for p in partials {
        rho += p;
    }
    let mut density = DensityMatrix::unchecked(grid.clone(), rho, family.time)?;
    let hermiticity_correction = density.hermitize();
    let trace_before = density.trace().re;
    if !(trace_before.abs() > 0.0) {
        return Err(Error::Solver("reconstructed trace vanishes".into()));
    }
    density.rho /= Complex64::new(trace_before, 0.0);
    let fidelity = match reference {
        Some(r) => {
            let f = r.overlap(&density)?;
            if f < MIN_FIDELITY {
                return Err(Error::LowFidelity { fidelity: f, threshold: MIN_FIDELITY });
            }
            Some(f)
        }
        None => None,
    };
    Ok(Reconstruction { density, trace_before, hermiticity_correction, fidelity, nodes: chars.len(), grid: family.grid })
}

/// Quantizer table accepting the symplectic form of a silent-axis node.
fn quantizer_kernel(
    grid: &Grid,
    params: &TomographyParams,
    x: &[f64],
    a: Option<&Potentials>,
    t: f64,
    units: &UnitsContext,
) -> Result<DMatrix<Complex64>> {
    let params = match params {
        TomographyParams::Symplectic { mu, nu } if mu.iter().zip(nu).any(|(m, n)| *m == 0.0 && *n == 0.0) => {
            TomographyParams::Probability { mu: mu.clone(), nu: nu.clone() }
        }
        _ => params.clone(),
    };
    let x = if params.scalar_x() { &x[..1] } else { x };
    if params.scalar_x() && matches!(params, TomographyParams::Probability { ref mu, ref nu } if mu.iter().chain(nu).all(|v| *v == 0.0)) {
        // origin node: the quantizer is a multiple of the identity
        let mw = units.m * units.omega;
        let norm = (mw / (2.0 * PI)).powi(grid.dim() as i32) / grid.cell_volume();
        return Ok(DMatrix::from_diagonal_element(grid.len(), grid.len(), Complex64::new(norm, 0.0)));
    }
    Ok(quantizer_matrix(grid, &params, x, a, t, units, DEFAULT_QUAD_ORDER)?.matrix)
}

fn phase_space_output(
    values: Vec<Complex64>,
    q_grid: &Grid,
    p_grid: &Grid,
    gauge_kind: GaugeKind,
    time: f64,
    units: UnitsContext,
) -> PhaseSpaceFunction {
    let vmax = values.iter().map(|v| v.re.abs()).fold(0.0, f64::max);
    let imax = values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    PhaseSpaceFunction {
        q_grid: q_grid.clone(),
        p_grid: p_grid.clone(),
        values: values.iter().map(|v| v.re).collect(),
        momentum_kind: match gauge_kind {
            GaugeKind::Ordinary => MomentumKind::Generalized,
            GaugeKind::GaugeIndependent => MomentumKind::Kinetic,
        },
        time,
        max_imag: if vmax > 0.0 { imax / vmax } else { imax },
        source_grid: q_grid.clone(),
        refine: 1,
        units,
    }
}

fn check_targets(dim: usize, q_grid: &Grid, p_grid: &Grid) -> Result<()> {
    if q_grid.dim() != dim || p_grid.dim() != dim {
        return Err(Error::GridMismatch("target grids and family dimensions differ".into()));
    }
    Ok(())
}

/// `W(q, p) = (m omega / 4 pi^2 hbar)^D int M exp(i s (x - mu q - nu p)) dx dmu dnu`
/// on the target grids.
pub fn reconstruct_wigner_from_probability(
    family: &TomogramFamily,
    q_grid: &Grid,
    p_grid: &Grid,
) -> Result<PhaseSpaceFunction> {
    let d = family.dim;
    check_targets(d, q_grid, p_grid)?;
    let u = family.units;
    let s = u.quantizer_frequency();
    let pref = (u.m * u.omega / (4.0 * PI * PI * u.hbar)).powi(d as i32);
    let chars = family_characteristics(family);
    let coef: Vec<Complex64> = chars.iter().zip(&family.weights).map(|(c, w)| c * (w * pref)).collect();
    let qs = q_grid.points();
    let ps = p_grid.points();
    let np = ps.len();
    let values: Vec<Complex64> = (0..qs.len() * np)
        .into_par_iter()
        .map(|k| {
            let (q, p) = (&qs[k / np], &ps[k % np]);
            let mut acc = Complex64::new(0.0, 0.0);
            for (n, c) in coef.iter().enumerate() {
                let (m, v) = (&family.mu[n], &family.nu[n]);
                let y: f64 = (0..d).map(|i| m[i] * q[i] + v[i] * p[i]).sum();
                acc += c * Complex64::from_polar(1.0, -s * y);
            }
            acc
        })
        .collect();
    Ok(phase_space_output(values, q_grid, p_grid, family.gauge_kind, family.time, u))
}

/// Angular and radial resolution of a unit-sphere family: `n_xi` nodes per
/// angle (periodic on the first, midpoints on `[0, pi]` for the rest) and
/// `n_r` trapezoid nodes on `[0, r_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitSphereGrid {
    pub n_xi: usize,
    pub n_r: usize,
    pub r_max: f64,
}

impl Default for UnitSphereGrid {
    fn default() -> Self {
        Self { n_xi: 256, n_r: 128, r_max: 32.0 }
    }
}

/// Unit-sphere tomograms `w(x, xi)` over an angular grid.
#[derive(Debug, Clone)]
pub struct UnitSphereFamily {
    pub dim: usize,
    pub grid: UnitSphereGrid,
    pub xi: Vec<Vec<f64>>,
    /// Angular weights including the spherical Jacobian.
    pub weights: Vec<f64>,
    pub tomograms: Vec<Tomogram>,
    pub gauge_kind: GaugeKind,
    pub units: UnitsContext,
    pub time: f64,
}

pub fn sample_unit_sphere_family<'a>(
    state: impl Into<StateRef<'a>>,
    a: Option<&Potentials>,
    grid: UnitSphereGrid,
    units: &UnitsContext,
    opts: &TomogramOptions,
) -> Result<UnitSphereFamily> {
    let s = state.into();
    let d = s.grid().dim();
    let n_ang = 2 * d - 1;
    if grid.n_xi < 4 || grid.n_r < 4 || !(grid.r_max > 0.0) {
        return Err(Error::InvalidArgument("unit-sphere grid is too coarse".into()));
    }
    let count = grid.n_xi.checked_pow(n_ang as u32).unwrap_or(usize::MAX);
    if count > MAX_NODES {
        return Err(Error::MemoryBudget { required: count, budget: MAX_NODES });
    }
    let w = state_wigner(s, a, units, opts)?;
    let first_step = 2.0 * PI / grid.n_xi as f64;
    let rest_step = PI / grid.n_xi as f64;
    let mut xi = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for k in 0..count {
        let mut rem = k;
        let mut v = vec![0.0; n_ang];
        let mut wt = 1.0;
        for (c, vc) in v.iter_mut().enumerate() {
            let i = rem % grid.n_xi;
            rem /= grid.n_xi;
            if c == 0 {
                *vc = i as f64 * first_step;
                wt *= first_step;
            } else {
                *vc = (i as f64 + 0.5) * rest_step;
                wt *= rest_step * vc.sin().powi(c as i32);
            }
        }
        xi.push(v);
        weights.push(wt);
    }
    let tomograms = xi
        .par_iter()
        .map(|x| radon_transform(&w, &TomographyParams::UnitSphere { xi: x.clone() }, None, opts))
        .collect::<Result<Vec<_>>>()?;
    Ok(UnitSphereFamily {
        dim: d,
        grid,
        xi,
        weights,
        tomograms,
        gauge_kind: if a.is_some() { GaugeKind::GaugeIndependent } else { GaugeKind::Ordinary },
        units: *units,
        time: s.time(),
    })
}

/// `W(q, p) = (4 pi^2 m omega)^-D int w(x, xi) exp(i r (x - mu q - nu p / m omega)) r^(2D-1) J(xi) dx dr dxi`.
pub fn reconstruct_wigner_unit_sphere(
    family: &UnitSphereFamily,
    q_grid: &Grid,
    p_grid: &Grid,
) -> Result<PhaseSpaceFunction> {
    let d = family.dim;
    check_targets(d, q_grid, p_grid)?;
    let u = family.units;
    let mw = u.m * u.omega;
    let g = family.grid;
    let dr = g.r_max / (g.n_r as f64 - 1.0);
    let radial: Vec<(f64, f64)> = (0..g.n_r)
        .map(|k| {
            let r = k as f64 * dr;
            let tw = if k + 1 == g.n_r { 0.5 * dr } else { dr };
            (r, tw * r.powi(2 * d as i32 - 1))
        })
        .collect();
    let pref = (4.0 * PI * PI * mw).powi(-(d as i32));
    // per direction: unit vector and the radial characteristic values
    let dirs: Vec<(Vec<f64>, Vec<f64>, Vec<Complex64>)> = family
        .xi
        .par_iter()
        .zip(&family.tomograms)
        .zip(&family.weights)
        .map(|((xi, t), w)| {
            let (m, nt) = unit_sphere_direction(xi);
            let c = radial.iter().map(|(r, rw)| characteristic_value(t, *r) * (rw * w * pref)).collect();
            (m, nt, c)
        })
        .collect();
    // Euler-Maclaurin end correction at r = 0, where r^(2D-1) has a nonzero slope only for D = 1
    let start = if d == 1 {
        family.tomograms.iter().zip(&family.weights).map(|(t, w)| characteristic_value(t, 0.0) * w).sum::<Complex64>()
            * (pref * dr * dr / 12.0)
    } else {
        Complex64::new(0.0, 0.0)
    };
    let qs = q_grid.points();
    let ps = p_grid.points();
    let np = ps.len();
    let values: Vec<Complex64> = (0..qs.len() * np)
        .into_par_iter()
        .map(|k| {
            let (q, p) = (&qs[k / np], &ps[k % np]);
            let mut acc = start;
            for (m, nt, c) in &dirs {
                let y: f64 = (0..d).map(|i| m[i] * q[i] + nt[i] * p[i] / mw).sum();
                // exp(-i r y) on the uniform radial grid by recurrence
                let step = Complex64::from_polar(1.0, -dr * y);
                let mut ph = Complex64::new(1.0, 0.0);
                for ck in c {
                    acc += ck * ph;
                    ph *= step;
                }
            }
            acc
        })
        .collect();
    Ok(phase_space_output(values, q_grid, p_grid, family.gauge_kind, family.time, u))
}
