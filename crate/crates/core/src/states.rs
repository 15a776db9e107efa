//! Quantum states on grids, classical ensembles and the gauge action on states.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::{GaugeFunction, Potentials};
use crate::numerics::ops::derivative_values;
use crate::numerics::{Axis, DerivativeScheme, Grid, GridFunction};
use crate::units::UnitsContext;
use crate::wigner::PhaseSpaceFunction;

const C0: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Pure state `psi(q)` on a grid.
#[derive(Debug, Clone)]
pub struct WaveFunction {
    pub psi: GridFunction,
    pub time: f64,
}

impl WaveFunction {
    /// Validating constructor: unit norm to `1e-9` and `|psi| < 1e-8` on the boundary.
    pub fn new(psi: GridFunction, time: f64) -> Result<Self> {
        let wf = Self { psi, time };
        let n = wf.norm_sq();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidState(format!("norm^2 = {n}, expected 1")));
        }
        let edge = wf.edge_amplitude();
        if edge >= 1e-8 {
            return Err(Error::InvalidState(format!("boundary amplitude {edge:e} is not negligible")));
        }
        Ok(wf)
    }

    /// Normalize arbitrary samples without boundary checks.
    pub fn normalized(mut psi: GridFunction, time: f64) -> Result<Self> {
        let n = (psi.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * psi.grid.cell_volume()).sqrt();
        if !(n > 0.0 && n.is_finite()) {
            return Err(Error::InvalidState("cannot normalize a zero state".into()));
        }
        for v in &mut psi.values {
            *v /= n;
        }
        Ok(Self { psi, time })
    }

    pub fn grid(&self) -> &Grid {
        &self.psi.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.psi.values
    }

    pub fn norm_sq(&self) -> f64 {
        self.psi.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.psi.grid.cell_volume()
    }

    pub fn edge_amplitude(&self) -> f64 {
        self.psi.grid.boundary_indices().iter().map(|&i| self.psi.values[i].norm()).fold(0.0, f64::max)
    }

    /// Probability on the outermost `width` layers of the grid.
    pub fn edge_probability(&self, width: usize) -> f64 {
        let g = self.grid();
        let shape = g.shape();
        let dv = g.cell_volume();
        (0..g.len())
            .filter(|&i| {
                g.multi_index(i).iter().zip(&shape).any(|(&k, &n)| k < width || k + width >= n)
            })
            .map(|i| self.psi.values[i].norm_sqr() * dv)
            .sum()
    }

    pub fn density(&self) -> Vec<f64> {
        self.psi.values.iter().map(|v| v.norm_sqr()).collect()
    }

    pub fn mean_position(&self) -> Vec<f64> {
        let g = self.grid();
        let dv = g.cell_volume();
        let mut m = vec![0.0; g.dim()];
        for (i, v) in self.psi.values.iter().enumerate() {
            let q = g.point(i);
            for s in 0..g.dim() {
                m[s] += q[s] * v.norm_sqr() * dv;
            }
        }
        m
    }

    /// `<P_s>` with the spectral derivative.
    pub fn mean_momentum(&self, units: &UnitsContext) -> Vec<f64> {
        let g = self.grid();
        let dv = g.cell_volume();
        (0..g.dim())
            .map(|s| {
                let d = derivative_values(
                    &self.psi.values,
                    &g.shape(),
                    s,
                    g.axis(s).spacing(),
                    1,
                    DerivativeScheme::Spectral,
                );
                let acc: Complex64 = self.psi.values.iter().zip(&d).map(|(a, b)| a.conj() * b).sum();
                (acc * Complex64::new(0.0, -units.hbar) * dv).re
            })
            .collect()
    }

    /// `<q_s^2> - <q_s>^2` per axis.
    pub fn position_variance(&self) -> Vec<f64> {
        let g = self.grid();
        let dv = g.cell_volume();
        let m = self.mean_position();
        let mut v = vec![0.0; g.dim()];
        for (i, a) in self.psi.values.iter().enumerate() {
            let q = g.point(i);
            for s in 0..g.dim() {
                v[s] += (q[s] - m[s]).powi(2) * a.norm_sqr() * dv;
            }
        }
        v
    }

    /// `<phi|psi>` with the grid inner product.
    pub fn inner(&self, other: &WaveFunction) -> Result<Complex64> {
        if !self.grid().same_shape(other.grid()) {
            return Err(Error::GridMismatch("states live on different grids".into()));
        }
        let dv = self.grid().cell_volume();
        Ok(self.psi.values.iter().zip(&other.psi.values).map(|(a, b)| a.conj() * b).sum::<Complex64>() * dv)
    }

    pub fn fidelity(&self, other: &WaveFunction) -> Result<f64> {
        Ok(self.inner(other)?.norm_sqr())
    }
}

/// Density matrix `rho(q, q')` over grid x grid, stored as continuum kernel values.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub grid: Grid,
    pub rho: DMatrix<Complex64>,
    pub time: f64,
}

/// Sizes above which the positivity check is skipped in [`DensityMatrix::new`].
pub const PSD_CHECK_LIMIT: usize = 512;

impl DensityMatrix {
    /// Validating constructor: Hermitian to `1e-10`, unit trace to `1e-8`, and
    /// positive semidefinite to `-1e-8` when the matrix is small enough to diagonalize.
    pub fn new(grid: Grid, rho: DMatrix<Complex64>, time: f64) -> Result<Self> {
        let dm = Self::unchecked(grid, rho, time)?;
        let herm = dm.hermiticity_error();
        if herm > 1e-10 {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = dm.trace();
        if (tr.re - 1.0).abs() > 1e-8 || tr.im.abs() > 1e-8 {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        if dm.rho.nrows() <= PSD_CHECK_LIMIT {
            let min = dm.min_eigenvalue();
            if min < -1e-8 {
                return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(dm)
    }

    /// Shape-checked constructor without physical validation.
    pub fn unchecked(grid: Grid, rho: DMatrix<Complex64>, time: f64) -> Result<Self> {
        let n = grid.len();
        if rho.nrows() != n || rho.ncols() != n {
            return Err(Error::GridMismatch(format!("matrix is {}x{}, grid has {n} points", rho.nrows(), rho.ncols())));
        }
        if rho.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::InvalidState("non-finite density matrix entry".into()));
        }
        Ok(Self { grid, rho, time })
    }

    /// Convex mixture of pure states.
    pub fn mixture(components: &[(f64, &WaveFunction)]) -> Result<Self> {
        let first = components.first().ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?.1;
        let total: f64 = components.iter().map(|c| c.0).sum();
        if components.iter().any(|c| c.0 < 0.0) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument("mixture weights must be non-negative and sum to 1".into()));
        }
        let n = first.grid().len();
        let mut rho = DMatrix::zeros(n, n);
        for (w, psi) in components {
            if !psi.grid().same_shape(first.grid()) {
                return Err(Error::GridMismatch("mixture components on different grids".into()));
            }
            let v = psi.values();
            for j in 0..n {
                let cj = v[j].conj() * *w;
                for i in 0..n {
                    rho[(i, j)] += v[i] * cj;
                }
            }
        }
        Ok(Self { grid: first.grid().clone(), rho, time: first.time })
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.diagonal().iter().sum::<Complex64>() * self.grid.cell_volume()
    }

    pub fn hermiticity_error(&self) -> f64 {
        let n = self.rho.nrows();
        let scale = self.rho.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in 0..=i {
                worst = worst.max((self.rho[(i, j)] - self.rho[(j, i)].conj()).norm());
            }
        }
        worst / scale
    }

    /// Eigenvalues of the discrete operator `rho * dV` (ascending).
    pub fn eigenvalues(&self) -> Vec<f64> {
        let dv = self.grid.cell_volume();
        let m = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5 * dv, 0.0);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.partial_cmp(b).expect("finite eigenvalues"));
        ev
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn purity(&self) -> f64 {
        let dv = self.grid.cell_volume();
        let n = self.rho.nrows();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += (self.rho[(i, j)] * self.rho[(j, i)]).re;
            }
        }
        acc * dv * dv
    }

    pub fn diagonal(&self) -> Vec<f64> {
        self.rho.diagonal().iter().map(|v| v.re).collect()
    }

    /// `Tr(rho sigma)`.
    pub fn overlap(&self, other: &DensityMatrix) -> Result<f64> {
        if !self.grid.same_shape(&other.grid) {
            return Err(Error::GridMismatch("density matrices on different grids".into()));
        }
        let dv = self.grid.cell_volume();
        let n = self.rho.nrows();
        let mut acc = C0;
        for i in 0..n {
            for j in 0..n {
                acc += self.rho[(i, j)] * other.rho[(j, i)];
            }
        }
        Ok(acc.re * dv * dv)
    }

    /// Half the trace norm of the difference.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if !self.grid.same_shape(&other.grid) {
            return Err(Error::GridMismatch("density matrices on different grids".into()));
        }
        let diff = DensityMatrix { grid: self.grid.clone(), rho: &self.rho - &other.rho, time: self.time };
        Ok(0.5 * diff.eigenvalues().iter().map(|v| v.abs()).sum::<f64>())
    }

    /// `(rho + rho^dagger) / 2`; returns the largest change made.
    pub fn hermitize(&mut self) -> f64 {
        let h = (&self.rho + self.rho.adjoint()) * Complex64::new(0.5, 0.0);
        let change = (&h - &self.rho).iter().map(|v| v.norm()).fold(0.0, f64::max);
        self.rho = h;
        change
    }
}

/// Borrowed pure or mixed state.
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a WaveFunction),
    Mixed(&'a DensityMatrix),
}

impl<'a> From<&'a WaveFunction> for StateRef<'a> {
    fn from(w: &'a WaveFunction) -> Self {
        StateRef::Pure(w)
    }
}

impl<'a> From<&'a DensityMatrix> for StateRef<'a> {
    fn from(d: &'a DensityMatrix) -> Self {
        StateRef::Mixed(d)
    }
}

impl<'a> StateRef<'a> {
    pub fn grid(&self) -> &'a Grid {
        match self {
            StateRef::Pure(w) => w.grid(),
            StateRef::Mixed(d) => &d.grid,
        }
    }

    pub fn time(&self) -> f64 {
        match self {
            StateRef::Pure(w) => w.time,
            StateRef::Mixed(d) => d.time,
        }
    }

    /// `rho(q_i, q_j)`.
    pub fn element(&self, i: usize, j: usize) -> Complex64 {
        match self {
            StateRef::Pure(w) => w.psi.values[i] * w.psi.values[j].conj(),
            StateRef::Mixed(d) => d.rho[(i, j)],
        }
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            StateRef::Pure(w) => density_from_wavefunction(w),
            StateRef::Mixed(d) => (*d).clone(),
        }
    }
}

/// Band-limited (trigonometric) refinement of samples by an integer factor
/// along every axis of `shape`.
pub fn refine_values(values: &[Complex64], shape: &[usize], factor: usize) -> (Vec<Complex64>, Vec<usize>) {
    if factor == 1 {
        return (values.to_vec(), shape.to_vec());
    }
    let mut cur = values.to_vec();
    let mut cur_shape = shape.to_vec();
    let mut planner = FftPlanner::new();
    for axis in 0..shape.len() {
        let n = cur_shape[axis];
        let big = n * factor;
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(big);
        let mut new_shape = cur_shape.clone();
        new_shape[axis] = big;
        let stride: usize = cur_shape[axis + 1..].iter().product();
        let outer: usize = cur_shape[..axis].iter().product();
        let mut out = vec![C0; cur.len() * factor];
        let mut line = vec![C0; n];
        let mut spec = vec![C0; big];
        for o in 0..outer {
            for s in 0..stride {
                for i in 0..n {
                    line[i] = cur[o * n * stride + i * stride + s];
                }
                fwd.process(&mut line);
                spec.iter_mut().for_each(|v| *v = C0);
                for k in 0..n {
                    if 2 * k < n {
                        spec[k] = line[k];
                    } else if 2 * k > n {
                        spec[big - n + k] = line[k];
                    } else {
                        spec[k] = 0.5 * line[k];
                        spec[big - n + k] = 0.5 * line[k];
                    }
                }
                inv.process(&mut spec);
                for i in 0..big {
                    out[o * big * stride + i * stride + s] = spec[i] / n as f64;
                }
            }
        }
        cur = out;
        cur_shape = new_shape;
    }
    (cur, cur_shape)
}

/// Grid with every axis refined by `factor` (same minimum, spacing divided by `factor`).
pub fn refined_grid(grid: &Grid, factor: usize) -> Result<Grid> {
    let axes = grid
        .axes()
        .iter()
        .map(|a| {
            let h = a.spacing() / factor as f64;
            let n = a.n * factor;
            Axis::new(a.min, a.min + h * (n - 1) as f64, n)
        })
        .collect::<Result<Vec<_>>>()?;
    Grid::new(axes)
}

/// Normalized Gaussian packet centred at `q0` with mean momentum `p0` and
/// position standard deviation `sigma` along every axis.
pub fn gaussian_packet(grid: &Grid, q0: &[f64], p0: &[f64], sigma: f64, units: &UnitsContext) -> Result<WaveFunction> {
    let d = grid.dim();
    if q0.len() != d || p0.len() != d {
        return Err(Error::InvalidArgument("centre vectors must match the grid dimension".into()));
    }
    if !(sigma > 0.0) {
        return Err(Error::InvalidArgument("sigma must be positive".into()));
    }
    for s in 0..d {
        let a = grid.axis(s);
        if q0[s] - 5.0 * sigma < a.min || q0[s] + 5.0 * sigma > a.max {
            return Err(Error::OutsideDomain(format!("packet q0 ± 5σ leaves axis {s}")));
        }
    }
    let hbar = units.hbar;
    let psi = GridFunction::from_fn(grid.clone(), |q| {
        let mut arg = Complex64::new(0.0, 0.0);
        for s in 0..d {
            arg += Complex64::new(-(q[s] - q0[s]).powi(2) / (4.0 * sigma * sigma), p0[s] * q[s] / hbar);
        }
        arg.exp()
    });
    WaveFunction::normalized(psi, 0.0)
}

/// Harmonic-oscillator eigenstate `n` (0 or 1) along axis 0, Gaussian ground
/// states on the remaining axes.
pub fn oscillator_state(grid: &Grid, n: usize, units: &UnitsContext) -> Result<WaveFunction> {
    if n > 1 {
        return Err(Error::Unsupported("only the two lowest oscillator states are provided".into()));
    }
    let s2 = units.m * units.omega / units.hbar;
    let psi = GridFunction::from_fn(grid.clone(), |q| {
        let r2: f64 = q.iter().map(|x| x * x).sum();
        let poly = if n == 1 { q[0] } else { 1.0 };
        Complex64::new(poly * (-0.5 * s2 * r2).exp(), 0.0)
    });
    WaveFunction::normalized(psi, 0.0)
}

/// `rho(q, q') = psi(q) psi*(q')`.
pub fn density_from_wavefunction(psi: &WaveFunction) -> DensityMatrix {
    let v = psi.values();
    let n = v.len();
    let rho = DMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj());
    DensityMatrix { grid: psi.grid().clone(), rho, time: psi.time }
}

/// States that carry the gauge phase `exp(i e chi / c hbar)`.
pub trait GaugePhase: Sized {
    fn gauge_phase(&self, chi: &GaugeFunction, t: f64, units: &UnitsContext) -> Result<Self>;
}

fn phases(grid: &Grid, chi: &GaugeFunction, t: f64, units: &UnitsContext) -> Result<Vec<Complex64>> {
    if grid.dim() != chi.dim() {
        return Err(Error::GridMismatch("gauge function dimension differs from grid".into()));
    }
    let k = units.gauge_phase();
    Ok(grid.points().iter().map(|q| Complex64::from_polar(1.0, k * chi.value(q, t))).collect())
}

impl GaugePhase for WaveFunction {
    fn gauge_phase(&self, chi: &GaugeFunction, t: f64, units: &UnitsContext) -> Result<Self> {
        let ph = phases(self.grid(), chi, t, units)?;
        let values = self.psi.values.iter().zip(&ph).map(|(a, b)| a * b).collect();
        Ok(Self { psi: GridFunction { grid: self.grid().clone(), values }, time: self.time })
    }
}

impl GaugePhase for DensityMatrix {
    fn gauge_phase(&self, chi: &GaugeFunction, t: f64, units: &UnitsContext) -> Result<Self> {
        let ph = phases(&self.grid, chi, t, units)?;
        let n = ph.len();
        let rho = DMatrix::from_fn(n, n, |i, j| ph[i] * self.rho[(i, j)] * ph[j].conj());
        Ok(Self { grid: self.grid.clone(), rho, time: self.time })
    }
}

/// `psi -> psi e^{i e chi / c hbar}`, `rho -> e^{i e chi / c hbar} rho e^{-i e chi / c hbar}`.
pub fn gauge_phase_transform<S: GaugePhase>(state: &S, chi: &GaugeFunction, t: f64, units: &UnitsContext) -> Result<S> {
    state.gauge_phase(chi, t, units)
}

/// One classical particle with kinetic momentum `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub q: [f64; 3],
    pub p: [f64; 3],
    pub weight: f64,
}

/// Weighted ensemble of non-interacting particles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParticleEnsemble {
    pub dim: usize,
    pub particles: Vec<Particle>,
}

impl ParticleEnsemble {
    pub fn new(dim: usize, particles: Vec<Particle>) -> Result<Self> {
        if !(1..=3).contains(&dim) || particles.is_empty() {
            return Err(Error::InvalidArgument("ensemble needs dimension 1..=3 and at least one particle".into()));
        }
        let total: f64 = particles.iter().map(|p| p.weight).sum();
        if particles.iter().any(|p| !(p.weight > 0.0)) || (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!("weights must be positive and sum to 1 (sum {total})")));
        }
        if particles.iter().any(|p| p.q.iter().chain(&p.p).any(|v| !v.is_finite())) {
            return Err(Error::InvalidArgument("non-finite particle coordinates".into()));
        }
        Ok(Self { dim, particles })
    }

    pub fn total_weight(&self) -> f64 {
        self.particles.iter().map(|p| p.weight).sum()
    }

    pub fn mean(&self) -> (Vec<f64>, Vec<f64>) {
        let mut q = vec![0.0; self.dim];
        let mut p = vec![0.0; self.dim];
        for pt in &self.particles {
            for s in 0..self.dim {
                q[s] += pt.weight * pt.q[s];
                p[s] += pt.weight * pt.p[s];
            }
        }
        (q, p)
    }

    /// Convert canonical momenta to kinetic ones, `p = P - e A(q, t) / c`.
    pub fn canonical_to_kinetic(&mut self, a: &Potentials, t: f64, units: &UnitsContext) {
        for pt in &mut self.particles {
            let av = a.vector_potential(&pt.q[..self.dim], t);
            for s in 0..self.dim {
                pt.p[s] -= units.e * av[s] / units.c;
            }
        }
    }
}

/// Importance-sample `n_particles` from the non-negative part of a phase-space
/// function with a seeded generator. Momenta are in the function's own variable
/// (use [`ParticleEnsemble::canonical_to_kinetic`] for canonical input).
pub fn sample_ensemble_from_wigner(w: &PhaseSpaceFunction, n_particles: usize, seed: u64) -> Result<ParticleEnsemble> {
    if n_particles == 0 {
        return Err(Error::InvalidArgument("need at least one particle".into()));
    }
    let cell = w.cell_volume();
    let negative: f64 = w.values.iter().filter(|v| **v < 0.0).map(|v| -v * cell).sum();
    if negative > 1e-3 {
        return Err(Error::InvalidState(format!("phase-space function has negative mass {negative:e}; not classical")));
    }
    let weights: Vec<f64> = w.values.iter().map(|v| v.max(0.0)).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| Error::InvalidState(format!("cannot sample: {e}")))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let d = w.dim();
    let np = w.p_grid.len();
    let wt = 1.0 / n_particles as f64;
    let particles = (0..n_particles)
        .map(|_| {
            let idx = dist.sample(&mut rng);
            let q = w.q_grid.point(idx / np);
            let p = w.p_grid.point(idx % np);
            let mut pt = Particle { q: [0.0; 3], p: [0.0; 3], weight: wt };
            for s in 0..d {
                pt.q[s] = q[s] + w.q_grid.axis(s).spacing() * (rng.gen::<f64>() - 0.5);
                pt.p[s] = p[s] + w.p_grid.axis(s).spacing() * (rng.gen::<f64>() - 0.5);
            }
            pt
        })
        .collect();
    // exact renormalization guards against round-off in 1/n
    let mut ens = ParticleEnsemble { dim: d, particles };
    let total = ens.total_weight();
    for p in &mut ens.particles {
        p.weight /= total;
    }
    Ok(ens)
}

pub(crate) fn refine_state(state: StateRef<'_>, factor: usize) -> Result<(Grid, RefinedKernel)> {
    let grid = state.grid();
    let fine = refined_grid(grid, factor)?;
    let shape = grid.shape();
    match state {
        StateRef::Pure(w) => {
            let (v, _) = refine_values(&w.psi.values, &shape, factor);
            Ok((fine, RefinedKernel::Pure(v)))
        }
        StateRef::Mixed(d) => {
            let n = grid.len();
            let mut full_shape = shape.clone();
            full_shape.extend_from_slice(&shape);
            // column-major DMatrix -> row-major (i, j) array
            let mut flat = vec![C0; n * n];
            for i in 0..n {
                for j in 0..n {
                    flat[i * n + j] = d.rho[(i, j)];
                }
            }
            let (v, _) = refine_values(&flat, &full_shape, factor);
            Ok((fine, RefinedKernel::Mixed { n: n * factor.pow(grid.dim() as u32), values: v }))
        }
    }
}

/// State kernel on a refined grid.
pub(crate) enum RefinedKernel {
    Pure(Vec<Complex64>),
    Mixed { n: usize, values: Vec<Complex64> },
}

impl RefinedKernel {
    #[inline]
    pub(crate) fn element(&self, i: usize, j: usize) -> Complex64 {
        match self {
            RefinedKernel::Pure(v) => v[i] * v[j].conj(),
            RefinedKernel::Mixed { n, values } => values[i * n + j],
        }
    }
}

