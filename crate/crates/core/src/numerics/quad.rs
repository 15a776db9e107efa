//! Gauss–Legendre quadrature, chord averages of the vector potential, and
//! local Lagrange interpolation on uniform samples.

use crate::error::{Error, Result};
use crate::fields::Potentials;

/// Default order of the chord quadrature.
pub const DEFAULT_QUAD_ORDER: usize = 8;

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and weights for `tau` in `[-1/2, 1/2]`.
pub fn chord_rule(order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    (x.iter().map(|v| 0.5 * v).collect(), w.iter().map(|v| 0.5 * v).collect())
}

/// `int_{-1/2}^{1/2} A(q + tau u, t) dtau` by Gauss–Legendre of the given order.
pub fn averaged_potential(a: &Potentials, q: &[f64], u: &[f64], t: f64, quad_order: usize) -> Result<Vec<f64>> {
    if quad_order < 2 {
        return Err(Error::InvalidArgument(format!("quad_order must be >= 2, got {quad_order}")));
    }
    let d = a.dim();
    if q.len() != d || u.len() != d {
        return Err(Error::InvalidArgument("point and displacement must match field dimension".into()));
    }
    let (tau, w) = chord_rule(quad_order);
    let mut out = vec![0.0; d];
    let mut pt = vec![0.0; d];
    for (tk, wk) in tau.iter().zip(&w) {
        for s in 0..d {
            pt[s] = q[s] + tk * u[s];
        }
        let av = a.vector_potential(&pt, t);
        for s in 0..d {
            out[s] += wk * av[s];
        }
    }
    Ok(out)
}

/// Stencil width of [`lagrange_interp`].
pub const LAGRANGE_POINTS: usize = 6;

/// Six-point Lagrange interpolation of uniform samples `f` (spacing 1 in index
/// units) at fractional index `s`; zero outside `[0, n-1]`.
pub fn lagrange_interp(f: &[f64], s: f64) -> f64 {
    let n = f.len();
    if !(s >= 0.0 && s <= (n - 1) as f64) {
        return 0.0;
    }
    let i0 = s.floor() as isize - 2;
    let i0 = i0.clamp(0, n as isize - LAGRANGE_POINTS as isize) as usize;
    let mut acc = 0.0;
    for j in 0..LAGRANGE_POINTS {
        let xj = (i0 + j) as f64;
        if (s - xj).abs() < 1e-14 {
            return f[i0 + j];
        }
        let mut l = 1.0;
        for k in 0..LAGRANGE_POINTS {
            if k != j {
                l *= (s - (i0 + k) as f64) / (xj - (i0 + k) as f64);
            }
        }
        acc += l * f[i0 + j];
    }
    acc
}

/// Trapezoid weights for `n` uniform nodes with spacing `h`.
pub fn trapezoid_weights(n: usize, h: f64) -> Vec<f64> {
    let mut w = vec![h; n];
    w[0] = 0.5 * h;
    w[n - 1] = 0.5 * h;
    w
}
