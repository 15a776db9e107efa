use rayon::prelude::*;

use super::{GaugeKind, Tomogram, TomographyParams};
use crate::error::{Error, Result};
use crate::fields::Potentials;
use crate::numerics::{lagrange_interp, Axis, Grid};
use crate::states::StateRef;
use crate::units::UnitsContext;
use crate::wigner::{gauge_independent_wigner_with, wigner_transform_with, MomentumKind, PhaseSpaceFunction, WignerOptions};

/// Controls of the Radon-of-Wigner path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TomogramOptions {
    pub x_points: usize,
    /// Half-width of the default x axis relative to `|mu| q_max + |nu| p_max`.
    pub x_margin: f64,
    /// Allowed `|integral - 1|` before normalization.
    pub normalization_tolerance: f64,
    pub wigner: Option<WignerOptions>,
}

impl Default for TomogramOptions {
    fn default() -> Self {
        Self { x_points: 257, x_margin: 1.2, normalization_tolerance: 1e-3, wigner: None }
    }
}

/// Tomogram of a state. Ordinary tomograms use the canonical Wigner function,
/// gauge-independent ones the kinetic `W_g` built with `a`.
pub fn compute_tomogram<'a>(
    state: impl Into<StateRef<'a>>,
    params: &TomographyParams,
    gauge_kind: GaugeKind,
    a: Option<&Potentials>,
    x_grid: Option<&Grid>,
    units: &UnitsContext,
    opts: &TomogramOptions,
) -> Result<Tomogram> {
    let s = state.into();
    let wopts = opts.wigner.unwrap_or_else(|| WignerOptions::for_dim(s.grid().dim()));
    let w = match gauge_kind {
        GaugeKind::Ordinary => wigner_transform_with(s, units, &wopts)?,
        GaugeKind::GaugeIndependent => {
            let a = a.ok_or_else(|| Error::InvalidArgument("gauge-independent tomogram needs potentials".into()))?;
            gauge_independent_wigner_with(s, a, s.time(), units, &wopts)?
        }
    };
    radon_transform(&w, params, x_grid, opts)
}

/// Default x grid: `x_points` nodes over `+-margin (|mu| q_max + |nu| p_max)`,
/// per axis or summed for scalar schemes.
pub fn default_x_grid(w: &PhaseSpaceFunction, params: &TomographyParams, opts: &TomogramOptions) -> Result<Grid> {
    let (mu, nu) = params.symplectic_form(&w.units);
    let reach: Vec<f64> = (0..mu.len())
        .map(|s| {
            let qa = w.q_grid.axis(s);
            let pa = w.p_grid.axis(s);
            let qm = qa.min.abs().max(qa.max.abs());
            let pm = pa.min.abs().max(pa.max.abs());
            opts.x_margin * (mu[s].abs() * qm + nu[s].abs() * pm)
        })
        .collect();
    if params.scalar_x() {
        Grid::new(vec![Axis::symmetric(reach.iter().sum(), opts.x_points)?])
    } else {
        Grid::new(reach.iter().map(|r| Axis::symmetric(*r, opts.x_points)).collect::<Result<Vec<_>>>()?)
    }
}

/// `int W delta(x - mu q - nu p) dq dp` on one `(q, p)` plane. Sums over the
/// coarser-crossing variable and interpolates the other with six-point Lagrange.
fn radon_plane(f: &[f64], qa: &Axis, pa: &Axis, mu: f64, nu: f64, xs: &[f64], out: &mut [f64]) {
    let (nq, np) = (qa.n, pa.n);
    let (dq, dp) = (qa.spacing(), pa.spacing());
    if mu.abs() * dq <= nu.abs() * dp {
        let w = dq / nu.abs();
        for (o, &x) in out.iter_mut().zip(xs) {
            let mut acc = 0.0;
            for i in 0..nq {
                let p = (x - mu * qa.point(i)) / nu;
                acc += lagrange_interp(&f[i * np..(i + 1) * np], pa.fractional_index(p));
            }
            *o = acc * w;
        }
    } else {
        let w = dp / mu.abs();
        let mut col = vec![0.0; nq];
        out.iter_mut().for_each(|o| *o = 0.0);
        for j in 0..np {
            for i in 0..nq {
                col[i] = f[i * np + j];
            }
            let pj = pa.point(j);
            for (o, &x) in out.iter_mut().zip(xs) {
                *o += lagrange_interp(&col, qa.fractional_index((x - nu * pj) / mu)) * w;
            }
        }
    }
}

/// Replaces axes `aq` and `ap` of a row-major array by one `x` axis at `aq`.
fn reduce_pair(
    data: &[f64],
    shape: &[usize],
    aq: usize,
    ap: usize,
    qa: &Axis,
    pa: &Axis,
    mu: f64,
    nu: f64,
    xa: &Axis,
) -> (Vec<f64>, Vec<usize>) {
    let strides: Vec<usize> = (0..shape.len()).map(|k| shape[k + 1..].iter().product()).collect();
    let others: Vec<usize> = (0..shape.len()).filter(|&k| k != aq && k != ap).collect();
    let n_outer: usize = others.iter().map(|&k| shape[k]).product();
    let mut new_shape: Vec<usize> = Vec::with_capacity(shape.len() - 1);
    for (k, &n) in shape.iter().enumerate() {
        if k == aq {
            new_shape.push(xa.n);
        } else if k != ap {
            new_shape.push(n);
        }
    }
    let new_strides: Vec<usize> = (0..new_shape.len()).map(|k| new_shape[k + 1..].iter().product()).collect();
    // position of the x axis in the new array
    let ax = aq - usize::from(ap < aq);
    let xs = xa.points();
    let lines: Vec<(usize, Vec<f64>)> = (0..n_outer)
        .into_par_iter()
        .map_init(
            || vec![0.0; shape[aq] * shape[ap]],
            |plane, o| {
                let mut rem = o;
                let mut base = 0;
                let mut new_base = 0;
                for &k in others.iter().rev() {
                    let idx = rem % shape[k];
                    rem /= shape[k];
                    base += idx * strides[k];
                    let nk = k - usize::from(k > ap);
                    new_base += idx * new_strides[nk];
                }
                for i in 0..shape[aq] {
                    for j in 0..shape[ap] {
                        plane[i * shape[ap] + j] = data[base + i * strides[aq] + j * strides[ap]];
                    }
                }
                let mut line = vec![0.0; xa.n];
                radon_plane(plane, qa, pa, mu, nu, &xs, &mut line);
                (new_base, line)
            },
        )
        .collect();
    let mut out = vec![0.0; new_shape.iter().product()];
    for (b, line) in lines {
        for (k, v) in line.into_iter().enumerate() {
            out[b + k * new_strides[ax]] = v;
        }
    }
    (out, new_shape)
}

/// Integrates axes `aq` and `ap` out of a row-major array.
fn marginalize_pair(data: &[f64], shape: &[usize], aq: usize, ap: usize, weight: f64) -> (Vec<f64>, Vec<usize>) {
    let new_shape: Vec<usize> = shape.iter().enumerate().filter(|(k, _)| *k != aq && *k != ap).map(|(_, n)| *n).collect();
    let mut out = vec![0.0; new_shape.iter().product::<usize>().max(1)];
    let mut idx = vec![0usize; shape.len()];
    for v in data {
        let mut flat = 0;
        for (k, &i) in idx.iter().enumerate() {
            if k != aq && k != ap {
                flat = flat * shape[k] + i;
            }
        }
        out[flat] += v * weight;
        for k in (0..shape.len()).rev() {
            idx[k] += 1;
            if idx[k] < shape[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    (out, new_shape)
}

/// Radon transform of a phase-space function along the section `params`.
///
/// Per-axis lines are integrated one degree of freedom at a time; scalar schemes
/// then fold the per-axis variables into `x = sum_s x_s`. The result is
/// normalized, and an integral farther than the tolerance from 1 is an error.
pub fn radon_transform(
    w: &PhaseSpaceFunction,
    params: &TomographyParams,
    x_grid: Option<&Grid>,
    opts: &TomogramOptions,
) -> Result<Tomogram> {
    params.validate()?;
    let d = w.dim();
    if params.dim() != d {
        return Err(Error::GridMismatch(format!("parameters are {}-dimensional, state is {d}-dimensional", params.dim())));
    }
    let x_grid = match x_grid {
        Some(g) => g.clone(),
        None => default_x_grid(w, params, opts)?,
    };
    let scalar = params.scalar_x();
    if x_grid.dim() != if scalar { 1 } else { d } {
        return Err(Error::GridMismatch("x grid dimension does not match the scheme".into()));
    }
    let (mu, nu) = params.symplectic_form(&w.units);
    let mut shape: Vec<usize> = w.q_grid.shape().into_iter().chain(w.p_grid.shape()).collect();
    let mut data = w.values.clone();
    // per-axis reach, used for the intermediate grids of scalar schemes
    let mut partial: Vec<Axis> = Vec::new();
    let mut pos = 0;
    for s in 0..d {
        let qa = *w.q_grid.axis(s);
        let pa = *w.p_grid.axis(s);
        let ap = pos + (d - s);
        if mu[s] == 0.0 && nu[s] == 0.0 {
            (data, shape) = marginalize_pair(&data, &shape, pos, ap, qa.spacing() * pa.spacing());
            continue;
        }
        let xa = if scalar && d > 1 {
            let ext = x_grid.axis(0);
            let qm = qa.min.abs().max(qa.max.abs());
            let pm = pa.min.abs().max(pa.max.abs());
            let reach = (mu[s].abs() * qm + nu[s].abs() * pm).max(ext.spacing() * 4.0);
            let n = ((2.0 * reach / ext.spacing()).ceil() as usize + 1).max(8);
            Axis::centered_with_spacing(ext.spacing(), n)?
        } else if scalar {
            *x_grid.axis(0)
        } else {
            *x_grid.axis(s)
        };
        (data, shape) = reduce_pair(&data, &shape, pos, ap, &qa, &pa, mu[s], nu[s], &xa);
        partial.push(xa);
        pos += 1;
    }
    if scalar && partial.len() > 1 {
        // x = x_1 + x_2 (+ x_3): successive unit-slope line integrals
        let target = *x_grid.axis(0);
        while partial.len() > 1 {
            let a0 = partial[0];
            let a1 = partial[1];
            let out_axis = if partial.len() == 2 {
                target
            } else {
                let reach = a0.max.abs().max(a0.min.abs()) + a1.max.abs().max(a1.min.abs());
                let n = (2.0 * reach / target.spacing()).ceil() as usize + 1;
                Axis::centered_with_spacing(target.spacing(), n)?
            };
            (data, shape) = reduce_pair(&data, &shape, 0, 1, &a0, &a1, 1.0, 1.0, &out_axis);
            partial.remove(1);
            partial[0] = out_axis;
        }
    } else if scalar && partial.is_empty() {
        return Err(Error::InvalidArgument("mu = nu = 0 is a degenerate observable".into()));
    }
    debug_assert_eq!(shape, x_grid.shape());
    let mut tomo = Tomogram {
        params: params.clone(),
        x_grid,
        values: data,
        gauge_kind: match w.momentum_kind {
            MomentumKind::Generalized => GaugeKind::Ordinary,
            MomentumKind::Kinetic => GaugeKind::GaugeIndependent,
        },
        time: w.time,
        normalization_factor: 1.0,
    };
    let norm = tomo.integral();
    if !((norm - 1.0).abs() <= opts.normalization_tolerance) {
        return Err(Error::Normalization { factor: norm });
    }
    tomo.values.iter_mut().for_each(|v| *v /= norm);
    tomo.normalization_factor = norm;
    Ok(tomo)
}
