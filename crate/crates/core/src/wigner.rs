//! Standard and gauge-independent Wigner functions and their inverses.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::Potentials;
use crate::numerics::quad::chord_rule;
use crate::numerics::{Axis, Grid, DEFAULT_QUAD_ORDER};
use crate::states::{refine_state, DensityMatrix, StateRef};
use crate::units::UnitsContext;

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Which momentum the `p` axis of a phase-space function measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentumKind {
    /// Canonical momentum `P = -i hbar grad`.
    Generalized,
    /// Kinetic momentum `p = P - e A / c`.
    Kinetic,
}

/// Real function on a `(q, p)` grid, stored with the momentum index fastest.
#[derive(Debug, Clone)]
pub struct PhaseSpaceFunction {
    pub q_grid: Grid,
    pub p_grid: Grid,
    pub values: Vec<f64>,
    pub momentum_kind: MomentumKind,
    pub time: f64,
    /// Largest imaginary residue relative to the largest real value.
    pub max_imag: f64,
    /// Position grid of the state this function was computed from.
    pub source_grid: Grid,
    /// Band-limited refinement factor between `source_grid` and `q_grid`.
    pub refine: usize,
    pub units: UnitsContext,
}

impl PhaseSpaceFunction {
    pub fn dim(&self) -> usize {
        self.q_grid.dim()
    }

    pub fn cell_volume(&self) -> f64 {
        self.q_grid.cell_volume() * self.p_grid.cell_volume()
    }

    #[inline]
    pub fn at(&self, iq: usize, ip: usize) -> f64 {
        self.values[iq * self.p_grid.len() + ip]
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.cell_volume()
    }

    /// `int W dp` at every q node.
    pub fn position_marginal(&self) -> Vec<f64> {
        let np = self.p_grid.len();
        let dp = self.p_grid.cell_volume();
        self.values.chunks(np).map(|row| row.iter().sum::<f64>() * dp).collect()
    }

    /// `int W dq` at every p node.
    pub fn momentum_marginal(&self) -> Vec<f64> {
        let np = self.p_grid.len();
        let dq = self.q_grid.cell_volume();
        let mut out = vec![0.0; np];
        for row in self.values.chunks(np) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += v * dq;
            }
        }
        out
    }

    pub fn max_abs_difference(&self, other: &PhaseSpaceFunction) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
    }

    /// `int |W1 - W2| dq dp`.
    pub fn l1_distance(&self, other: &PhaseSpaceFunction) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self.values.iter().zip(&other.values).map(|(a, b)| (a - b).abs()).sum::<f64>() * self.cell_volume())
    }

    /// Refuses to mix functions of kinetic and canonical momentum.
    pub fn check_compatible(&self, other: &PhaseSpaceFunction) -> Result<()> {
        if self.momentum_kind != other.momentum_kind {
            return Err(Error::InvalidArgument(format!(
                "cannot combine {:?} and {:?} momentum functions",
                self.momentum_kind, other.momentum_kind
            )));
        }
        if !self.q_grid.same_shape(&other.q_grid) || !self.p_grid.same_shape(&other.p_grid) {
            return Err(Error::GridMismatch("phase-space grids differ".into()));
        }
        Ok(())
    }

    /// Value at `(q_flat, p)` with the momentum interpolated by six-point Lagrange (1D only).
    pub fn interpolate_p(&self, iq: usize, p: f64) -> f64 {
        let np = self.p_grid.len();
        let ax = self.p_grid.axis(0);
        crate::numerics::lagrange_interp(&self.values[iq * np..(iq + 1) * np], ax.fractional_index(p))
    }
}

/// Discretization controls of the transform.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WignerOptions {
    /// Band-limited refinement factor of the state grid.
    pub refine: usize,
    /// Zero padding of the chord sum, giving a finer momentum grid.
    pub p_oversample: usize,
    /// Gauss–Legendre order of the chord average of A.
    pub quad_order: usize,
    /// Largest number of stored values.
    pub max_values: usize,
}

impl WignerOptions {
    pub fn for_dim(dim: usize) -> Self {
        if dim == 1 {
            Self { refine: 2, p_oversample: 4, quad_order: DEFAULT_QUAD_ORDER, max_values: 50_000_000 }
        } else {
            Self { refine: 1, p_oversample: 2, quad_order: DEFAULT_QUAD_ORDER, max_values: 50_000_000 }
        }
    }
}

/// Phase attached to the chord `u` at midpoint `q`.
enum ChordPhase<'a> {
    None,
    /// `(e / c hbar) u . int A(q + tau u) dtau`
    LineAverage(&'a Potentials),
    /// `(e / c hbar) u . A(q)`
    Midpoint(&'a Potentials),
}

/// `W(q, P)` with canonical momentum.
pub fn wigner_transform<'a>(state: impl Into<StateRef<'a>>, units: &UnitsContext) -> Result<PhaseSpaceFunction> {
    let s = state.into();
    wigner_transform_with(s, units, &WignerOptions::for_dim(s.grid().dim()))
}

pub fn wigner_transform_with<'a>(
    state: impl Into<StateRef<'a>>,
    units: &UnitsContext,
    opts: &WignerOptions,
) -> Result<PhaseSpaceFunction> {
    let s = state.into();
    transform(s, units, opts, ChordPhase::None, s.time(), MomentumKind::Generalized)
}

/// Gauge-independent `W_g(q, p)` with kinetic momentum.
pub fn gauge_independent_wigner<'a>(
    state: impl Into<StateRef<'a>>,
    a: &Potentials,
    t: f64,
    units: &UnitsContext,
) -> Result<PhaseSpaceFunction> {
    let s = state.into();
    gauge_independent_wigner_with(s, a, t, units, &WignerOptions::for_dim(s.grid().dim()))
}

pub fn gauge_independent_wigner_with<'a>(
    state: impl Into<StateRef<'a>>,
    a: &Potentials,
    t: f64,
    units: &UnitsContext,
    opts: &WignerOptions,
) -> Result<PhaseSpaceFunction> {
    let s = state.into();
    if a.dim() != s.grid().dim() {
        return Err(Error::GridMismatch("potential and state dimensions differ".into()));
    }
    transform(s, units, opts, ChordPhase::LineAverage(a), t, MomentumKind::Kinetic)
}

/// `W(q, p + e A(q, t) / c)`: the canonical Wigner function read at kinetic momentum.
pub fn kinetic_shifted_wigner<'a>(
    state: impl Into<StateRef<'a>>,
    a: &Potentials,
    t: f64,
    units: &UnitsContext,
    opts: &WignerOptions,
) -> Result<PhaseSpaceFunction> {
    let s = state.into();
    if a.dim() != s.grid().dim() {
        return Err(Error::GridMismatch("potential and state dimensions differ".into()));
    }
    transform(s, units, opts, ChordPhase::Midpoint(a), t, MomentumKind::Kinetic)
}

struct Layout {
    fine: Grid,
    fine_shape: Vec<usize>,
    l: Vec<usize>,
    p_grid: Grid,
}

fn layout(fine: Grid, opts: &WignerOptions, units: &UnitsContext) -> Result<Layout> {
    let fine_shape = fine.shape();
    let mut l = Vec::new();
    let mut axes = Vec::new();
    for (s, &n) in fine_shape.iter().enumerate() {
        let ls = 2 * (opts.p_oversample.max(1) * n).div_ceil(2);
        let dp = std::f64::consts::PI * units.hbar / (fine.axis(s).spacing() * ls as f64);
        axes.push(Axis::new(-(ls as f64 / 2.0) * dp, (ls as f64 / 2.0 - 1.0) * dp, ls)?);
        l.push(ls);
    }
    Ok(Layout { fine, fine_shape, l, p_grid: Grid::new(axes)? })
}

/// Multi-dimensional in-place FFT over row-major `shape`.
fn fft_nd(buf: &mut [Complex64], shape: &[usize], inverse: bool, planner: &mut FftPlanner<f64>) {
    for axis in 0..shape.len() {
        let n = shape[axis];
        let fft = if inverse { planner.plan_fft_inverse(n) } else { planner.plan_fft_forward(n) };
        let stride: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        if stride == 1 {
            for chunk in buf.chunks_mut(n) {
                fft.process(chunk);
            }
            continue;
        }
        let mut line = vec![C0; n];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for i in 0..n {
                    line[i] = buf[base + i * stride];
                }
                fft.process(&mut line);
                for i in 0..n {
                    buf[base + i * stride] = line[i];
                }
            }
        }
    }
}

/// Enumerates chord offsets `k` valid at midpoint `s` on every axis.
fn chord_ranges(s: &[usize], shape: &[usize], l: &[usize]) -> Vec<(i64, i64)> {
    s.iter()
        .zip(shape)
        .zip(l)
        .map(|((&si, &n), &ls)| {
            let lim = ls as i64 / 2 - 1;
            let lo = -(si as i64).min((n - 1 - si) as i64).min(lim);
            (lo, -lo)
        })
        .collect()
}

fn transform(
    state: StateRef<'_>,
    units: &UnitsContext,
    opts: &WignerOptions,
    phase: ChordPhase<'_>,
    t: f64,
    kind: MomentumKind,
) -> Result<PhaseSpaceFunction> {
    units.validate()?;
    if opts.refine == 0 {
        return Err(Error::InvalidArgument("refinement factor must be >= 1".into()));
    }
    let src = state.grid().clone();
    let (fine, kernel) = refine_state(state, opts.refine)?;
    let lay = layout(fine, opts, units)?;
    let d = src.dim();
    let nq = lay.fine.len();
    let np: usize = lay.l.iter().product();
    if nq.saturating_mul(np) > opts.max_values {
        return Err(Error::MemoryBudget { required: nq * np, budget: opts.max_values });
    }
    let h: Vec<f64> = (0..d).map(|s| lay.fine.axis(s).spacing()).collect();
    let norm: f64 = h.iter().map(|hs| 2.0 * hs / (2.0 * std::f64::consts::PI * units.hbar)).product();
    let (tau, wts) = chord_rule(opts.quad_order.max(2));
    let kphase = units.gauge_phase();
    let strides = lay.fine.strides();
    let lstrides: Vec<usize> = (0..d).map(|s| lay.l[s + 1..].iter().product()).collect();

    let rows: Vec<(Vec<f64>, f64)> = (0..nq)
        .into_par_iter()
        .map_init(FftPlanner::new, |planner, sflat| {
            let s = lay.fine.multi_index(sflat);
            let q = lay.fine.point(sflat);
            let ranges = chord_ranges(&s, &lay.fine_shape, &lay.l);
            let mut buf = vec![C0; np];
            let mut k = ranges.iter().map(|r| r.0).collect::<Vec<i64>>();
            let mut u = vec![0.0; d];
            let mut pt = vec![0.0; d];
            'outer: loop {
                let mut ia = 0usize;
                let mut ib = 0usize;
                let mut slot = 0usize;
                let mut parity = 0i64;
                for a in 0..d {
                    ia += (s[a] as i64 - k[a]) as usize * strides[a];
                    ib += (s[a] as i64 + k[a]) as usize * strides[a];
                    slot += (k[a].rem_euclid(lay.l[a] as i64)) as usize * lstrides[a];
                    parity += k[a];
                    u[a] = 2.0 * k[a] as f64 * h[a];
                }
                let mut v = kernel.element(ia, ib);
                let ph = match &phase {
                    ChordPhase::None => 0.0,
                    ChordPhase::Midpoint(a) => {
                        let av = a.vector_potential(&q, t);
                        (0..d).map(|c| u[c] * av[c]).sum::<f64>() * kphase
                    }
                    ChordPhase::LineAverage(a) => {
                        let mut acc = 0.0;
                        for (tk, wk) in tau.iter().zip(&wts) {
                            for c in 0..d {
                                pt[c] = q[c] + tk * u[c];
                            }
                            let av = a.vector_potential(&pt, t);
                            acc += wk * (0..d).map(|c| u[c] * av[c]).sum::<f64>();
                        }
                        acc * kphase
                    }
                };
                if ph != 0.0 {
                    v *= Complex64::from_polar(1.0, ph);
                }
                if parity % 2 != 0 {
                    v = -v;
                }
                buf[slot] = v;
                // odometer over the chord box
                let mut a = d;
                loop {
                    if a == 0 {
                        break 'outer;
                    }
                    a -= 1;
                    if k[a] < ranges[a].1 {
                        k[a] += 1;
                        break;
                    }
                    k[a] = ranges[a].0;
                }
            }
            fft_nd(&mut buf, &lay.l, true, planner);
            let mut imag: f64 = 0.0;
            let row = buf
                .iter()
                .map(|c| {
                    imag = imag.max(c.im.abs() * norm);
                    c.re * norm
                })
                .collect();
            (row, imag)
        })
        .collect();

    let mut values = Vec::with_capacity(nq * np);
    let mut max_imag: f64 = 0.0;
    for (row, im) in rows {
        max_imag = max_imag.max(im);
        values.extend(row);
    }
    let scale = values.iter().map(|v| v.abs()).fold(0.0, f64::max).max(1e-300);
    Ok(PhaseSpaceFunction {
        q_grid: lay.fine,
        p_grid: lay.p_grid,
        values,
        momentum_kind: kind,
        time: state.time(),
        max_imag: max_imag / scale,
        source_grid: src,
        refine: opts.refine,
        units: *units,
    })
}

/// Inverse transform back to a density matrix on the source grid. Kinetic
/// functions need the vector potential used in the forward transform.
pub fn inverse_wigner(w: &PhaseSpaceFunction, a: Option<&Potentials>, t: f64) -> Result<DensityMatrix> {
    inverse_wigner_order(w, a, t, DEFAULT_QUAD_ORDER)
}

pub fn inverse_wigner_order(w: &PhaseSpaceFunction, a: Option<&Potentials>, t: f64, quad_order: usize) -> Result<DensityMatrix> {
    if w.momentum_kind == MomentumKind::Kinetic && a.is_none() {
        return Err(Error::InvalidArgument("kinetic-momentum function needs its vector potential".into()));
    }
    let r = w.refine;
    if !r.is_multiple_of(2) {
        return Err(Error::Unsupported("inverse transform needs an even refinement factor".into()));
    }
    let d = w.dim();
    let src = &w.source_grid;
    let fine_shape = w.q_grid.shape();
    let l = w.p_grid.shape();
    let np = w.p_grid.len();
    let h: Vec<f64> = (0..d).map(|s| w.q_grid.axis(s).spacing()).collect();
    let norm: f64 = h.iter().map(|hs| 2.0 * hs / (2.0 * std::f64::consts::PI * w.units.hbar)).product();
    let lprod = np as f64;
    let (tau, wts) = chord_rule(quad_order.max(2));
    let kphase = w.units.gauge_phase();
    let lstrides: Vec<usize> = (0..d).map(|s| l[s + 1..].iter().product()).collect();
    let n = src.len();

    // Spectrum of each needed midpoint row: fine midpoints are r (i + j) / 2.
    let mids: Vec<usize> = (0..w.q_grid.len())
        .filter(|&f| w.q_grid.multi_index(f).iter().all(|m| m % (r / 2) == 0))
        .collect();
    let spectra: Vec<(usize, Vec<Complex64>)> = mids
        .into_par_iter()
        .map_init(FftPlanner::new, |planner, f| {
            let mut buf: Vec<Complex64> = w.values[f * np..(f + 1) * np].iter().map(|v| Complex64::new(*v, 0.0)).collect();
            fft_nd(&mut buf, &l, false, planner);
            (f, buf)
        })
        .collect();
    let mut lookup = std::collections::HashMap::with_capacity(spectra.len());
    for (f, b) in spectra {
        lookup.insert(f, b);
    }

    let mut rho = DMatrix::zeros(n, n);
    let fine_strides = w.q_grid.strides();
    let mut u = vec![0.0; d];
    let mut pt = vec![0.0; d];
    for i in 0..n {
        let mi = src.multi_index(i);
        for j in 0..n {
            let mj = src.multi_index(j);
            let mut sflat = 0;
            let mut slot = 0;
            let mut parity = 0i64;
            let mut inside = true;
            for c in 0..d {
                let (a, b) = ((r * mi[c]) as i64, (r * mj[c]) as i64);
                let s = (a + b) / 2;
                let k = (b - a) / 2;
                if k.abs() >= l[c] as i64 / 2 || s as usize >= fine_shape[c] {
                    inside = false;
                    break;
                }
                sflat += s as usize * fine_strides[c];
                slot += k.rem_euclid(l[c] as i64) as usize * lstrides[c];
                parity += k;
                u[c] = 2.0 * k as f64 * h[c];
            }
            if !inside {
                continue;
            }
            let spec = &lookup[&sflat];
            let mut v = spec[slot] / (norm * lprod);
            if parity % 2 != 0 {
                v = -v;
            }
            if let (MomentumKind::Kinetic, Some(a)) = (w.momentum_kind, a) {
                let q = w.q_grid.point(sflat);
                let mut acc = 0.0;
                for (tk, wk) in tau.iter().zip(&wts) {
                    for c in 0..d {
                        pt[c] = q[c] + tk * u[c];
                    }
                    let av = a.vector_potential(&pt, t);
                    acc += wk * (0..d).map(|c| u[c] * av[c]).sum::<f64>();
                }
                v *= Complex64::from_polar(1.0, -acc * kphase);
            }
            rho[(i, j)] = v;
        }
    }
    DensityMatrix::unchecked(src.clone(), rho, w.time)
}
