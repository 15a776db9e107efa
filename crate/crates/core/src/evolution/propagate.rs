//! Crank–Nicolson propagation of wave functions in electromagnetic potentials.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::Potentials;
use crate::numerics::ops::{map_lines, SpectralLine};
use crate::numerics::{Grid, GridFunction};
use crate::states::WaveFunction;
use crate::units::UnitsContext;

/// Probability allowed on the outer grid layers before a run is aborted.
pub const LEAK_THRESHOLD: f64 = 1e-6;
/// Number of outer layers watched by the leakage monitor.
pub const EDGE_LAYERS: usize = 2;
/// Largest 1D grid the dense solver accepts.
pub const DENSE_MAX: usize = 128;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PropagatorMethod {
    #[default]
    CrankNicolson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PropagatorConfig {
    pub dt: f64,
    pub steps: usize,
    #[serde(default)]
    pub method: PropagatorMethod,
    /// Matrix-free solves when true; dense factorization (1D, N <= 128) otherwise.
    #[serde(default = "default_sparse")]
    pub sparse: bool,
    /// Relative residual target of the iterative solve.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
}

fn default_sparse() -> bool {
    true
}

fn default_tolerance() -> f64 {
    1e-13
}

impl Default for PropagatorConfig {
    fn default() -> Self {
        Self { dt: 1e-3, steps: 1, method: PropagatorMethod::CrankNicolson, sparse: true, tolerance: 1e-13 }
    }
}

impl PropagatorConfig {
    pub fn new(dt: f64, steps: usize) -> Self {
        Self { dt, steps, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) || self.steps == 0 {
            return Err(Error::InvalidArgument(format!("need dt > 0 and steps >= 1 (dt = {}, steps = {})", self.dt, self.steps)));
        }
        if !(self.tolerance > 0.0 && self.tolerance < 1e-6) {
            return Err(Error::InvalidArgument(format!("solver tolerance {} outside (0, 1e-6)", self.tolerance)));
        }
        Ok(())
    }
}

/// Minimal-coupling Hamiltonian `(P - eA/c)^2 / 2m + e phi` on a grid, with a
/// spectral canonical momentum.
pub struct Hamiltonian {
    grid: Grid,
    shape: Vec<usize>,
    lines: Vec<SpectralLine>,
    potentials: Potentials,
    units: UnitsContext,
    /// `e A_s / c` per axis at the current time.
    a: Vec<Vec<f64>>,
    /// `e phi` at the current time.
    v: Vec<f64>,
    time: f64,
}

impl Hamiltonian {
    pub fn new(grid: &Grid, potentials: &Potentials, t: f64, units: &UnitsContext) -> Result<Self> {
        if potentials.dim() != grid.dim() {
            return Err(Error::GridMismatch(format!(
                "potentials of dimension {} on a {}D grid",
                potentials.dim(),
                grid.dim()
            )));
        }
        for s in 0..grid.dim() {
            let ax = grid.axis(s);
            let mut corner = vec![0.0; grid.dim()];
            for q in [ax.min, ax.max] {
                corner[s] = q;
                if !potentials.in_domain(&corner) {
                    return Err(Error::OutsideDomain(format!("grid axis {s} leaves the potential domain")));
                }
            }
        }
        let lines = grid.axes().iter().map(|ax| SpectralLine::new(ax.n, ax.spacing())).collect();
        let mut h = Self {
            grid: grid.clone(),
            shape: grid.shape(),
            lines,
            potentials: potentials.clone(),
            units: *units,
            a: vec![vec![0.0; grid.len()]; grid.dim()],
            v: vec![0.0; grid.len()],
            time: f64::NAN,
        };
        h.set_time(t);
        Ok(h)
    }

    pub fn set_time(&mut self, t: f64) {
        if t == self.time || (self.potentials.is_static && self.time.is_finite()) {
            return;
        }
        let (e, c) = (self.units.e, self.units.c);
        for i in 0..self.grid.len() {
            let q = self.grid.point(i);
            let av = self.potentials.vector_potential(&q, t);
            for s in 0..self.grid.dim() {
                self.a[s][i] = e * av[s] / c;
            }
            self.v[i] = e * self.potentials.scalar_potential(&q, t);
        }
        self.time = t;
    }

    /// Upper bound on the spectral radius.
    pub fn norm_bound(&self) -> f64 {
        let mut kin = 0.0;
        for s in 0..self.grid.dim() {
            let pmax = std::f64::consts::PI * self.units.hbar / self.grid.axis(s).spacing();
            let amax = self.a[s].iter().fold(0.0f64, |m, x| m.max(x.abs()));
            kin += (pmax + amax).powi(2);
        }
        kin / (2.0 * self.units.m) + self.v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
    }

    fn kinetic_factor(&self, psi: &[Complex64], s: usize) -> Vec<Complex64> {
        let hb = Complex64::new(0.0, -self.units.hbar);
        let line = &self.lines[s];
        let d = map_lines(psi, &self.shape, s, |l, o| line.apply(l, 1, o));
        d.iter().zip(psi).zip(&self.a[s]).map(|((di, pi), ai)| hb * di - ai * pi).collect()
    }

    pub fn apply(&self, psi: &[Complex64]) -> Vec<Complex64> {
        let mut out: Vec<Complex64> = psi.iter().zip(&self.v).map(|(p, v)| p * v).collect();
        let k = 0.5 / self.units.m;
        for s in 0..self.grid.dim() {
            let first = self.kinetic_factor(psi, s);
            let second = self.kinetic_factor(&first, s);
            for (o, x) in out.iter_mut().zip(second) {
                *o += k * x;
            }
        }
        out
    }

    pub fn dense(&self) -> DMatrix<Complex64> {
        let n = self.grid.len();
        let mut m = DMatrix::zeros(n, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = Complex64::new(1.0, 0.0);
            for (i, v) in self.apply(&e).into_iter().enumerate() {
                m[(i, j)] = v;
            }
            e[j] = Complex64::new(0.0, 0.0);
        }
        m
    }

    pub fn expectation(&self, psi: &WaveFunction) -> f64 {
        let hp = self.apply(psi.values());
        let acc: Complex64 = psi.values().iter().zip(&hp).map(|(a, b)| a.conj() * b).sum();
        acc.re * self.grid.cell_volume()
    }
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Solve `(1 + i tau H) x = b` by conjugate gradients on `(1 + tau^2 H^2) x = (1 - i tau H) b`.
fn cn_solve(h: &Hamiltonian, tau: f64, b: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    let it = Complex64::new(0.0, tau);
    let normal = |x: &[Complex64]| -> Vec<Complex64> {
        let hx = h.apply(x);
        let hhx = h.apply(&hx);
        x.iter().zip(&hhx).map(|(a, c)| a + tau * tau * c).collect()
    };
    let hb = h.apply(b);
    let rhs: Vec<Complex64> = b.iter().zip(&hb).map(|(x, y)| x - it * y).collect();
    let mut x = b.to_vec();
    let ax = normal(&x);
    let mut r: Vec<Complex64> = rhs.iter().zip(&ax).map(|(a, c)| a - c).collect();
    let mut p = r.clone();
    let mut rr = dot(&r, &r).re;
    let target = tol * tol * dot(&rhs, &rhs).re;
    for _ in 0..200 {
        if rr <= target {
            return Ok(x);
        }
        let ap = normal(&p);
        let alpha = rr / dot(&p, &ap).re;
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r).re;
        let beta = rr_new / rr;
        for i in 0..p.len() {
            p[i] = r[i] + beta * p[i];
        }
        rr = rr_new;
    }
    if rr <= target {
        Ok(x)
    } else {
        Err(Error::Solver(format!("conjugate gradients stalled at residual {:e}", (rr / dot(&rhs, &rhs).re).sqrt())))
    }
}

struct DenseStepper {
    lu: nalgebra::LU<Complex64, nalgebra::Dyn, nalgebra::Dyn>,
    explicit: DMatrix<Complex64>,
}

impl DenseStepper {
    fn new(h: &Hamiltonian, tau: f64) -> Self {
        let hm = h.dense();
        let n = hm.nrows();
        let id = DMatrix::<Complex64>::identity(n, n);
        let it = Complex64::new(0.0, tau);
        Self { lu: (&id + &hm * it).lu(), explicit: &id - &hm * it }
    }

    fn step(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        let b = &self.explicit * DVector::from_column_slice(psi);
        self.lu
            .solve(&b)
            .map(|x| x.as_slice().to_vec())
            .ok_or_else(|| Error::Solver("singular Crank–Nicolson matrix".into()))
    }
}

fn check_stability(h: &Hamiltonian, cfg: &PropagatorConfig) -> Result<()> {
    let budget = cfg.dt * h.norm_bound() / h.units.hbar;
    if budget > 0.5 {
        return Err(Error::InvalidArgument(format!(
            "dt = {} violates the stability budget: dt |H| / hbar = {budget:.3} > 0.5",
            cfg.dt
        )));
    }
    Ok(())
}

/// Propagate and return the states after every `every`-th step (including the
/// initial state).
pub fn schrodinger_trajectory(
    psi: &WaveFunction,
    potentials: &Potentials,
    config: &PropagatorConfig,
    every: usize,
    units: &UnitsContext,
) -> Result<Vec<WaveFunction>> {
    config.validate()?;
    units.validate()?;
    if every == 0 {
        return Err(Error::InvalidArgument("sampling stride must be >= 1".into()));
    }
    let grid = psi.grid().clone();
    let dt = config.dt;
    let tau = 0.5 * dt / units.hbar;
    let mut h = Hamiltonian::new(&grid, potentials, psi.time + 0.5 * dt, units)?;
    check_stability(&h, config)?;
    let dense = if config.sparse {
        None
    } else {
        if grid.dim() != 1 || grid.len() > DENSE_MAX {
            return Err(Error::Unsupported(format!("dense propagation needs a 1D grid of at most {DENSE_MAX} points")));
        }
        Some(DenseStepper::new(&h, tau))
    };
    let mut dense = dense;
    let mut values = psi.values().to_vec();
    let mut t = psi.time;
    let mut out = vec![psi.clone()];
    for step in 1..=config.steps {
        h.set_time(t + 0.5 * dt);
        values = match &mut dense {
            Some(d) => {
                if !potentials.is_static {
                    *d = DenseStepper::new(&h, tau);
                }
                d.step(&values)?
            }
            None => {
                let hv = h.apply(&values);
                let b: Vec<Complex64> = values.iter().zip(&hv).map(|(x, y)| x - Complex64::new(0.0, tau) * y).collect();
                cn_solve(&h, tau, &b, config.tolerance)?
            }
        };
        t = psi.time + step as f64 * dt;
        let wf = WaveFunction { psi: GridFunction { grid: grid.clone(), values: values.clone() }, time: t };
        let edge = wf.edge_probability(EDGE_LAYERS);
        if edge > LEAK_THRESHOLD {
            return Err(Error::BoundaryLeakage { edge_probability: edge, time: t });
        }
        if step % every == 0 || step == config.steps {
            out.push(wf);
        }
    }
    Ok(out)
}

/// Crank–Nicolson propagation with a midpoint Hamiltonian.
pub fn schrodinger_propagate(
    psi: &WaveFunction,
    potentials: &Potentials,
    config: &PropagatorConfig,
    units: &UnitsContext,
) -> Result<WaveFunction> {
    let mut traj = schrodinger_trajectory(psi, potentials, config, config.steps, units)?;
    Ok(traj.pop().expect("trajectory holds the final state"))
}

/// `<psi|H(t)|psi>` at the state's time.
pub fn energy(psi: &WaveFunction, potentials: &Potentials, units: &UnitsContext) -> Result<f64> {
    Ok(Hamiltonian::new(psi.grid(), potentials, psi.time, units)?.expectation(psi))
}
