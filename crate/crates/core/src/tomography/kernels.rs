use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GaugeKind, Tomogram, TomographyParams};
use crate::error::{Error, Result};
use crate::fields::Potentials;
use crate::numerics::{averaged_potential, Grid};
use crate::states::DensityMatrix;
use crate::units::UnitsContext;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    Dequantizer,
    Quantizer,
}

/// Position-representation table `K[i, j] = <q_i|K|q_j>` of a dequantizer or
/// quantizer at fixed `(x, mu, nu)`. Delta factors carry `1 / h` so that
/// `sum_j K[i, j] f_j dV` acts as the integral kernel.
#[derive(Debug, Clone)]
pub struct KernelOperator {
    pub grid: Grid,
    pub matrix: DMatrix<Complex64>,
    pub kind: KernelKind,
    pub params: TomographyParams,
    pub x: Vec<f64>,
    pub gauge_kind: GaugeKind,
}

impl KernelOperator {
    /// `Tr(rho K)` with the grid measure.
    pub fn expectation(&self, rho: &DensityMatrix) -> Result<Complex64> {
        if !rho.grid.same_shape(&self.grid) {
            return Err(Error::GridMismatch("state and kernel grids differ".into()));
        }
        let dv = self.grid.cell_volume();
        let n = self.grid.len();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += rho.rho[(i, j)] * self.matrix[(j, i)];
            }
        }
        Ok(acc * dv * dv)
    }

    pub fn hermiticity_error(&self) -> f64 {
        let m = &self.matrix;
        let n = m.nrows();
        let mut e: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                e = e.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        e
    }
}

fn hat(s: f64) -> f64 {
    (1.0 - s.abs()).max(0.0)
}

/// Per-pair data of the dequantizer that does not depend on `x`.
pub(crate) struct DequantizerSpec {
    pub(crate) mu: Vec<f64>,
    nu: Vec<f64>,
    scalar: bool,
    /// Axis carrying the `x` phase in the scalar scheme.
    lead: usize,
}

impl DequantizerSpec {
    pub(crate) fn new(params: &TomographyParams, d: usize, units: &UnitsContext) -> Result<Self> {
        params.validate()?;
        if params.dim() != d {
            return Err(Error::GridMismatch("parameter and grid dimensions differ".into()));
        }
        let (mu, nu) = params.symplectic_form(units);
        let scalar = params.scalar_x();
        let lead = (0..d).max_by(|&a, &b| nu[a].abs().total_cmp(&nu[b].abs())).unwrap_or(0);
        // symplectic axes with nu = 0 take the diagonal branch instead
        if scalar && nu.iter().all(|v| *v == 0.0) {
            return Err(Error::InvalidArgument("all nu are zero".into()));
        }
        Ok(Self { mu, nu, scalar, lead })
    }

    /// Amplitude and x-independent phase of `<q'|U|q>`, and the coefficient
    /// multiplying each `x` component in the phase. `None` off the support.
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn element(
        &self,
        grid: &Grid,
        qp: &[f64],
        q: &[f64],
        a: Option<&Potentials>,
        t: f64,
        units: &UnitsContext,
        quad_order: usize,
        xcoef: &mut [f64],
    ) -> Result<Option<(f64, f64)>> {
        let d = grid.dim();
        let hbar = units.hbar;
        let mut amp = 1.0;
        let mut phase = 0.0;
        let u: Vec<f64> = (0..d).map(|s| qp[s] - q[s]).collect();
        let c: Vec<f64> = (0..d).map(|s| 0.5 * (qp[s] + q[s])).collect();
        xcoef.iter_mut().for_each(|v| *v = 0.0);
        if self.scalar {
            let l = self.lead;
            let nl = self.nu[l];
            for s in 0..d {
                if s == l {
                    continue;
                }
                let h = grid.axis(s).spacing();
                let wgt = hat((self.nu[s] / nl * u[l] - u[s]) / h) / h;
                if wgt == 0.0 {
                    return Ok(None);
                }
                amp *= wgt;
            }
            amp /= 2.0 * PI * hbar * nl.abs();
            let mc: f64 = (0..d).map(|s| self.mu[s] * c[s]).sum();
            phase -= u[l] * mc / (hbar * nl);
            xcoef[0] = u[l] / (hbar * nl);
        } else {
            for s in 0..d {
                let (m, n) = (self.mu[s], self.nu[s]);
                if n == 0.0 {
                    // delta(x - mu q) on the diagonal; NaN in `xcoef` marks the hat factor
                    if u[s] != 0.0 {
                        return Ok(None);
                    }
                    let h = grid.axis(s).spacing();
                    amp /= h * h * m.abs();
                    xcoef[s] = f64::NAN;
                } else {
                    amp /= 2.0 * PI * hbar * n.abs();
                    phase -= u[s] * m * c[s] / (hbar * n);
                    xcoef[s] = u[s] / (hbar * n);
                }
            }
        }
        if let Some(a) = a {
            if u.iter().any(|v| *v != 0.0) {
                let abar = averaged_potential(a, &c, &u, t, quad_order)?;
                phase += units.gauge_phase() * (0..d).map(|s| u[s] * abar[s]).sum::<f64>();
            }
        }
        Ok(Some((amp, phase)))
    }
}

/// Value of the `x`-dependent factor of a dequantizer element.
pub(crate) fn x_factor(xcoef: &[f64], x: &[f64], q: &[f64], mu: &[f64], grid: &Grid) -> Complex64 {
    let mut ph = 0.0;
    let mut amp = 1.0;
    for s in 0..xcoef.len() {
        if xcoef[s].is_nan() {
            let h = grid.axis(s).spacing();
            amp *= hat((q[s] - x[s] / mu[s]) / h);
        } else {
            ph += xcoef[s] * x[s];
        }
    }
    Complex64::from_polar(amp, ph)
}

/// Dequantizer table `<q'|U(x, mu, nu)|q>`. With `a` it carries the chord
/// line-integral phase of the vector potential (gauge-independent kernel).
///
/// An axis with `nu = 0` uses the regular form `delta(x - mu q)` on the
/// diagonal. Scalar schemes key the delta constraints to the largest `|nu|`.
pub fn dequantizer_matrix(
    grid: &Grid,
    params: &TomographyParams,
    x: &[f64],
    a: Option<&Potentials>,
    t: f64,
    units: &UnitsContext,
    quad_order: usize,
) -> Result<KernelOperator> {
    let d = grid.dim();
    let spec = DequantizerSpec::new(params, d, units)?;
    let nx = if spec.scalar { 1 } else { d };
    if x.len() != nx {
        return Err(Error::InvalidArgument(format!("expected {nx} x values, got {}", x.len())));
    }
    let n = grid.len();
    let pts = grid.points();
    let mut matrix = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    let rows: Vec<Vec<(usize, Complex64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let mut xcoef = vec![0.0; nx];
            let mut row = Vec::new();
            for j in 0..=i {
                if let Some((amp, ph)) = spec.element(grid, &pts[i], &pts[j], a, t, units, quad_order, &mut xcoef)? {
                    let v = x_factor(&xcoef, x, &pts[j], &spec.mu, grid) * Complex64::from_polar(amp, ph);
                    row.push((j, v));
                }
            }
            Ok(row)
        })
        .collect::<Result<_>>()?;
    for (i, row) in rows.into_iter().enumerate() {
        for (j, v) in row {
            matrix[(i, j)] = v;
            matrix[(j, i)] = v.conj();
        }
    }
    Ok(KernelOperator {
        grid: grid.clone(),
        matrix,
        kind: KernelKind::Dequantizer,
        params: params.clone(),
        x: x.to_vec(),
        gauge_kind: if a.is_some() { GaugeKind::GaugeIndependent } else { GaugeKind::Ordinary },
    })
}

/// Quantizer table `<q|D(x, mu, nu)|q'>`. The displacement
/// `delta(q - q' - nu sqrt(m omega hbar))` is split between the two nearest
/// grid columns with linear weights.
pub fn quantizer_matrix(
    grid: &Grid,
    params: &TomographyParams,
    x: &[f64],
    a: Option<&Potentials>,
    t: f64,
    units: &UnitsContext,
    quad_order: usize,
) -> Result<KernelOperator> {
    params.validate()?;
    let d = grid.dim();
    if params.dim() != d {
        return Err(Error::GridMismatch("parameter and grid dimensions differ".into()));
    }
    let nx = if params.scalar_x() { 1 } else { d };
    if x.len() != nx {
        return Err(Error::InvalidArgument(format!("expected {nx} x values, got {}", x.len())));
    }
    let (mu, nu) = params.symplectic_form(units);
    let s = units.quantizer_frequency();
    let l = units.quantizer_shift();
    let mw = units.m * units.omega;
    for k in 0..d {
        if (nu[k] * l).abs() > grid.axis(k).extent() {
            return Err(Error::OutsideDomain(format!("displacement {} on axis {k} leaves the grid", nu[k] * l)));
        }
    }
    let n = grid.len();
    let strides = grid.strides();
    let norm = (mw / (2.0 * PI)).powi(d as i32);
    let xsum: f64 = x.iter().sum();
    let munu: f64 = (0..d).map(|k| mu[k] * nu[k]).sum::<f64>() * 0.5 * mw;
    let mut matrix = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    for i in 0..n {
        let mi = grid.multi_index(i);
        let q = grid.point(i);
        // columns reached by the displacement, with their weights
        let mut cols: Vec<(usize, f64, Vec<f64>)> = vec![(0, 1.0, Vec::new())];
        for k in 0..d {
            let ax = grid.axis(k);
            let f = mi[k] as f64 - nu[k] * l / ax.spacing();
            let f0 = f.floor();
            let frac = f - f0;
            let mut next = Vec::new();
            for (off, wgt) in [(0.0, 1.0 - frac), (1.0, frac)] {
                let jk = f0 + off;
                if wgt <= 1e-14 || jk < 0.0 || jk > (ax.n - 1) as f64 {
                    continue;
                }
                for (flat, w0, qq) in &cols {
                    let mut qq = qq.clone();
                    qq.push(ax.point(jk as usize));
                    next.push((flat + jk as usize * strides[k], w0 * wgt / ax.spacing(), qq));
                }
            }
            cols = next;
        }
        let base = s * xsum + munu - s * (0..d).map(|k| mu[k] * q[k]).sum::<f64>();
        for (j, wgt, qp) in cols {
            let mut ph = base;
            if let Some(a) = a {
                let u: Vec<f64> = (0..d).map(|k| q[k] - qp[k]).collect();
                if u.iter().any(|v| *v != 0.0) {
                    let c: Vec<f64> = (0..d).map(|k| 0.5 * (q[k] + qp[k])).collect();
                    let abar = averaged_potential(a, &c, &u, t, quad_order)?;
                    ph += units.gauge_phase() * (0..d).map(|k| u[k] * abar[k]).sum::<f64>();
                }
            }
            matrix[(i, j)] += Complex64::from_polar(norm * wgt, ph);
        }
    }
    Ok(KernelOperator {
        grid: grid.clone(),
        matrix,
        kind: KernelKind::Quantizer,
        params: params.clone(),
        x: x.to_vec(),
        gauge_kind: if a.is_some() { GaugeKind::GaugeIndependent } else { GaugeKind::Ordinary },
    })
}

/// Tomogram as `Tr(rho U(x))` on every node of `x_grid`, straight from the
/// dequantizer elements. Quadratic in the grid size per x node; meant as a
/// cross-check of the Radon path.
///
/// On a grid of spacing `h` the result is periodic in `x` with period
/// `2 pi hbar |nu| / h`, so `x_grid` must stay inside half a period.
pub fn tomogram_via_dequantizer(
    rho: &DensityMatrix,
    params: &TomographyParams,
    a: Option<&Potentials>,
    x_grid: &Grid,
    units: &UnitsContext,
    quad_order: usize,
) -> Result<Tomogram> {
    let grid = &rho.grid;
    let d = grid.dim();
    let spec = DequantizerSpec::new(params, d, units)?;
    let nx = if spec.scalar { 1 } else { d };
    if x_grid.dim() != nx {
        return Err(Error::GridMismatch("x grid dimension does not match the scheme".into()));
    }
    for k in 0..nx {
        let (s, nu) = if spec.scalar { (spec.lead, spec.nu[spec.lead]) } else { (k, spec.nu[k]) };
        if nu == 0.0 {
            continue;
        }
        let window = PI * units.hbar * nu.abs() / grid.axis(s).spacing();
        let ax = x_grid.axis(k);
        if ax.min < -window || ax.max > window {
            return Err(Error::InvalidGrid(format!("x axis {k} leaves the alias-free window +-{window}")));
        }
    }
    let n = grid.len();
    let pts = grid.points();
    let dv2 = grid.cell_volume().powi(2);
    // rho(q, q') U(q', q) without the x factor, on the support
    let mut terms: Vec<(Complex64, Vec<f64>, usize)> = Vec::new();
    let mut xcoef = vec![0.0; nx];
    for i in 0..n {
        for j in 0..n {
            if let Some((amp, ph)) = spec.element(grid, &pts[i], &pts[j], a, rho.time, units, quad_order, &mut xcoef)? {
                let v = rho.rho[(j, i)] * Complex64::from_polar(amp * dv2, ph);
                if v.norm() > 0.0 {
                    terms.push((v, xcoef.clone(), j));
                }
            }
        }
    }
    let xs = x_grid.points();
    let values: Vec<f64> = xs
        .par_iter()
        .map(|x| terms.iter().map(|(v, xc, j)| (v * x_factor(xc, x, &pts[*j], &spec.mu, grid)).re).sum())
        .collect();
    let norm = values.iter().sum::<f64>() * x_grid.cell_volume();
    Ok(Tomogram {
        params: params.clone(),
        x_grid: x_grid.clone(),
        values,
        gauge_kind: if a.is_some() { GaugeKind::GaugeIndependent } else { GaugeKind::Ordinary },
        time: rho.time,
        normalization_factor: norm,
    })
}
