//! Classical characteristics of the Liouville equation and classical tomograms.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{field_strengths, AffineField, Potentials};
use crate::numerics::Grid;
use crate::states::{Particle, ParticleEnsemble};
use crate::tomography::{GaugeKind, Tomogram, TomographyParams};
use crate::units::UnitsContext;
use crate::wigner::{MomentumKind, PhaseSpaceFunction};

fn fields_at(p: &Potentials, q: &[f64], t: f64, units: &UnitsContext) -> Result<([f64; 3], [f64; 3])> {
    if !p.in_domain(q) {
        return Err(Error::OutsideDomain(format!("trajectory left the field domain at q = {q:?}, t = {t}")));
    }
    if let (Some(af), true) = (p.affine, p.is_static) {
        return Ok((af.electric(q), af.b));
    }
    let f = field_strengths(p, q, t, units)?;
    let mut e = [0.0; 3];
    e[..f.e.len()].copy_from_slice(&f.e);
    Ok((e, f.b3()))
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

/// One drift–kick–drift step: half drift, half electric kick, Boris rotation,
/// half electric kick, half drift. Time symmetric, so `-dt` undoes `dt` for
/// static fields.
fn push(pt: &mut Particle, dim: usize, pot: &Potentials, t: f64, dt: f64, units: &UnitsContext) -> Result<()> {
    let m = units.m;
    for s in 0..dim {
        pt.q[s] += 0.5 * dt * pt.p[s] / m;
    }
    let (e, b) = fields_at(pot, &pt.q[..dim], t + 0.5 * dt, units)?;
    let kick = 0.5 * dt * units.e;
    let mut pm = pt.p;
    for s in 0..3 {
        pm[s] += kick * e[s];
    }
    let rot = 0.5 * dt * units.e / (m * units.c);
    let tv = [rot * b[0], rot * b[1], rot * b[2]];
    let t2 = tv[0] * tv[0] + tv[1] * tv[1] + tv[2] * tv[2];
    let sv = [2.0 * tv[0] / (1.0 + t2), 2.0 * tv[1] / (1.0 + t2), 2.0 * tv[2] / (1.0 + t2)];
    let c1 = cross(pm, tv);
    let pprime = [pm[0] + c1[0], pm[1] + c1[1], pm[2] + c1[2]];
    let c2 = cross(pprime, sv);
    for s in 0..3 {
        pt.p[s] = pm[s] + c2[s] + kick * e[s];
    }
    for s in dim..3 {
        pt.p[s] = 0.0;
    }
    for s in 0..dim {
        pt.q[s] += 0.5 * dt * pt.p[s] / m;
    }
    Ok(())
}

/// Push every particle along its characteristic with force `e (E + p x B / m c)`.
/// Weights are untouched.
pub fn liouville_propagate(
    ensemble: &ParticleEnsemble,
    potentials: &Potentials,
    t0: f64,
    dt: f64,
    steps: usize,
    units: &UnitsContext,
) -> Result<ParticleEnsemble> {
    if potentials.dim() != ensemble.dim {
        return Err(Error::GridMismatch("ensemble and potentials differ in dimension".into()));
    }
    if !(dt.is_finite() && dt != 0.0) {
        return Err(Error::InvalidArgument(format!("time step must be finite and non-zero, got {dt}")));
    }
    let dim = ensemble.dim;
    let particles = ensemble
        .particles
        .par_iter()
        .map(|p0| {
            let mut pt = *p0;
            for k in 0..steps {
                push(&mut pt, dim, potentials, t0 + k as f64 * dt, dt, units)?;
            }
            Ok(pt)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ParticleEnsemble { dim, particles })
}

/// Classical density at time `t`, `W(q, p, t) = W0(Phi_{-t}(q, p))`, on a phase-space
/// grid, found by integrating every node's characteristic back to `t0`.
#[allow(clippy::too_many_arguments)]
pub fn liouville_pullback(
    w0: impl Fn(&[f64], &[f64]) -> f64 + Sync,
    q_grid: &Grid,
    p_grid: &Grid,
    potentials: &Potentials,
    t0: f64,
    t: f64,
    steps: usize,
    units: &UnitsContext,
) -> Result<PhaseSpaceFunction> {
    let dim = q_grid.dim();
    if p_grid.dim() != dim || potentials.dim() != dim {
        return Err(Error::GridMismatch("phase-space grids and potentials differ in dimension".into()));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("need at least one step".into()));
    }
    let dt = (t0 - t) / steps as f64;
    let np = p_grid.len();
    let values = (0..q_grid.len() * np)
        .into_par_iter()
        .map(|k| {
            let (q, p) = (q_grid.point(k / np), p_grid.point(k % np));
            let mut pt = Particle { q: [0.0; 3], p: [0.0; 3], weight: 1.0 };
            pt.q[..dim].copy_from_slice(&q);
            pt.p[..dim].copy_from_slice(&p);
            for j in 0..steps {
                push(&mut pt, dim, potentials, t + j as f64 * dt, dt, units)?;
            }
            Ok(w0(&pt.q[..dim], &pt.p[..dim]))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PhaseSpaceFunction {
        q_grid: q_grid.clone(),
        p_grid: p_grid.clone(),
        values,
        momentum_kind: MomentumKind::Kinetic,
        time: t,
        max_imag: 0.0,
        source_grid: q_grid.clone(),
        refine: 1,
        units: *units,
    })
}

/// Gaussian kernel-density estimate of the distribution of `x = mu . q + nu . p`
/// (kinetic momentum), per axis or scalar depending on the scheme.
pub fn classical_tomogram(
    ensemble: &ParticleEnsemble,
    params: &TomographyParams,
    x_grid: &Grid,
    bandwidth: f64,
    units: &UnitsContext,
) -> Result<Tomogram> {
    params.validate()?;
    if params.dim() != ensemble.dim {
        return Err(Error::InvalidArgument("parameters and ensemble differ in dimension".into()));
    }
    let nx = if params.scalar_x() { 1 } else { ensemble.dim };
    if x_grid.dim() != nx {
        return Err(Error::GridMismatch(format!("x grid must have {nx} axes")));
    }
    if !(bandwidth > 0.0) {
        return Err(Error::InvalidArgument("bandwidth must be positive".into()));
    }
    let (mu, nu) = params.symplectic_form(units);
    let d = ensemble.dim;
    let xs: Vec<Vec<f64>> = ensemble
        .particles
        .iter()
        .map(|pt| {
            let per_axis: Vec<f64> = (0..d).map(|s| mu[s] * pt.q[s] + nu[s] * pt.p[s]).collect();
            if nx == 1 && d > 1 {
                vec![per_axis.iter().sum()]
            } else {
                per_axis
            }
        })
        .collect();
    let norm = (bandwidth * (2.0 * std::f64::consts::PI).sqrt()).powi(nx as i32);
    let inv = 0.5 / (bandwidth * bandwidth);
    let values = (0..x_grid.len())
        .into_par_iter()
        .map(|i| {
            let x = x_grid.point(i);
            ensemble
                .particles
                .iter()
                .zip(&xs)
                .map(|(pt, xp)| {
                    let r2: f64 = x.iter().zip(xp).map(|(a, b)| (a - b) * (a - b)).sum();
                    pt.weight * (-r2 * inv).exp()
                })
                .sum::<f64>()
                / norm
        })
        .collect();
    Ok(Tomogram {
        params: params.clone(),
        x_grid: x_grid.clone(),
        values,
        gauge_kind: GaugeKind::GaugeIndependent,
        time: 0.0,
        normalization_factor: 1.0,
    })
}

/// Gaussian phase-space density over `z = (q, p)` with kinetic momentum.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianPhaseDensity {
    pub dim: usize,
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianPhaseDensity {
    /// Wigner function of a Gaussian packet of width `sigma` (uncorrelated).
    pub fn packet(q0: &[f64], p0: &[f64], sigma: f64, units: &UnitsContext) -> Result<Self> {
        let d = q0.len();
        if d == 0 || d > 3 || p0.len() != d || !(sigma > 0.0) {
            return Err(Error::InvalidArgument("need matching q0, p0 of dimension 1..=3 and sigma > 0".into()));
        }
        let mut mean = DVector::zeros(2 * d);
        let mut cov = DMatrix::zeros(2 * d, 2 * d);
        for s in 0..d {
            mean[s] = q0[s];
            mean[d + s] = p0[s];
            cov[(s, s)] = sigma * sigma;
            cov[(d + s, d + s)] = (units.hbar / (2.0 * sigma)).powi(2);
        }
        Ok(Self { dim: d, mean, cov })
    }

    pub fn density(&self, q: &[f64], p: &[f64]) -> f64 {
        let d = self.dim;
        let z = DVector::from_iterator(2 * d, q.iter().chain(p).copied()) - &self.mean;
        let inv = self.cov.clone().try_inverse().expect("covariance is positive definite");
        let det = self.cov.determinant();
        let norm = ((2.0 * std::f64::consts::PI).powi(2 * d as i32) * det).sqrt();
        (-0.5 * z.dot(&(inv * &z))).exp() / norm
    }

    /// Exact transport under static affine `E` and constant `B` for a time `t`.
    pub fn flow(&self, field: &AffineField, t: f64, units: &UnitsContext) -> Self {
        let d = self.dim;
        let n = 2 * d + 1;
        let mut g = DMatrix::<f64>::zeros(n, n);
        let (m, e, c) = (units.m, units.e, units.c);
        for s in 0..d {
            g[(s, d + s)] = 1.0 / m;
            g[(d + s, n - 1)] = e * field.e0[s];
            for k in 0..d {
                g[(d + s, k)] = e * field.grad_e[s][k];
            }
        }
        // dp/dt = (e / m c) p x B
        let b = field.b;
        for a in 0..d {
            for k in 0..d {
                let mut unit = [0.0; 3];
                unit[k] = 1.0;
                g[(d + a, d + k)] += e / (m * c) * cross(unit, b)[a];
            }
        }
        let phi = (g * t).exp();
        let lin = phi.view((0, 0), (2 * d, 2 * d)).into_owned();
        let shift = phi.view((0, n - 1), (2 * d, 1)).into_owned();
        let mean = &lin * &self.mean + shift.column(0);
        let cov = &lin * &self.cov * lin.transpose();
        Self { dim: d, mean, cov }
    }

    /// Change of momentum variable `p -> p + shift + jac q`, e.g. kinetic to
    /// canonical momentum for an affine `eA/c`.
    pub fn momentum_shift(&self, shift: &[f64], jac: &[Vec<f64>]) -> Self {
        let d = self.dim;
        let mut l = DMatrix::<f64>::identity(2 * d, 2 * d);
        let mut b = DVector::<f64>::zeros(2 * d);
        for s in 0..d {
            b[d + s] = shift[s];
            for k in 0..d {
                l[(d + s, k)] = jac[s][k];
            }
        }
        Self { dim: d, mean: &l * &self.mean + b, cov: &l * &self.cov * l.transpose() }
    }

    /// Exact tomogram of the density on an `x` grid.
    pub fn tomogram(&self, params: &TomographyParams, x_grid: &Grid, units: &UnitsContext) -> Result<Tomogram> {
        params.validate()?;
        let d = self.dim;
        if params.dim() != d {
            return Err(Error::InvalidArgument("parameters and density differ in dimension".into()));
        }
        let (mu, nu) = params.symplectic_form(units);
        let nx = if params.scalar_x() { 1 } else { d };
        if x_grid.dim() != nx {
            return Err(Error::GridMismatch(format!("x grid must have {nx} axes")));
        }
        let mut l = DMatrix::<f64>::zeros(nx, 2 * d);
        for s in 0..d {
            let row = if nx == 1 { 0 } else { s };
            l[(row, s)] = mu[s];
            l[(row, d + s)] = nu[s];
        }
        let xm = &l * &self.mean;
        let xc = &l * &self.cov * l.transpose();
        let inv = xc.clone().try_inverse().ok_or_else(|| {
            Error::InvalidArgument("degenerate section: the observable has zero variance".into())
        })?;
        let norm = ((2.0 * std::f64::consts::PI).powi(nx as i32) * xc.determinant()).sqrt();
        let values = (0..x_grid.len())
            .map(|i| {
                let z = DVector::from_vec(x_grid.point(i)) - &xm;
                (-0.5 * z.dot(&(&inv * &z))).exp() / norm
            })
            .collect();
        Ok(Tomogram {
            params: params.clone(),
            x_grid: x_grid.clone(),
            values,
            gauge_kind: GaugeKind::GaugeIndependent,
            time: 0.0,
            normalization_factor: 1.0,
        })
    }
}

/// Deterministic ensemble: one particle per phase-space node, weighted by a
/// non-negative density and normalized.
pub fn lattice_ensemble(
    density: impl Fn(&[f64], &[f64]) -> f64,
    q_grid: &Grid,
    p_grid: &Grid,
) -> Result<ParticleEnsemble> {
    let dim = q_grid.dim();
    let mut particles = Vec::new();
    for i in 0..q_grid.len() {
        let q = q_grid.point(i);
        for j in 0..p_grid.len() {
            let p = p_grid.point(j);
            let w = density(&q, &p);
            if w > 0.0 {
                let mut pt = Particle { q: [0.0; 3], p: [0.0; 3], weight: w };
                pt.q[..dim].copy_from_slice(&q);
                pt.p[..dim].copy_from_slice(&p);
                particles.push(pt);
            }
        }
    }
    let total: f64 = particles.iter().map(|p| p.weight).sum();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("density vanishes on the lattice".into()));
    }
    for p in &mut particles {
        p.weight /= total;
    }
    ParticleEnsemble::new(dim, particles)
}
