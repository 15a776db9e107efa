//! Derivatives and the anchored inverse derivative along one grid axis.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use super::grid::GridFunction;
use crate::error::{Error, Result};

/// Derivative discretization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum DerivativeScheme {
    /// Fourier differentiation; assumes the samples are periodic (or decayed to zero at both ends).
    #[default]
    Spectral,
    /// Fourth-order central differences with one-sided boundary rows.
    FourthOrder,
}

/// Apply `f` to every line of `values` (row-major with `shape`) parallel to `axis`.
pub fn map_lines<T: Copy + Default>(
    values: &[T],
    shape: &[usize],
    axis: usize,
    mut f: impl FnMut(&[T], &mut [T]),
) -> Vec<T> {
    let n = shape[axis];
    let stride: usize = shape[axis + 1..].iter().product();
    let outer: usize = shape[..axis].iter().product();
    let mut out = vec![T::default(); values.len()];
    let mut line = vec![T::default(); n];
    let mut res = vec![T::default(); n];
    for o in 0..outer {
        for s in 0..stride {
            let base = o * n * stride + s;
            for i in 0..n {
                line[i] = values[base + i * stride];
            }
            f(&line, &mut res);
            for i in 0..n {
                out[base + i * stride] = res[i];
            }
        }
    }
    out
}

/// Spectral first/second derivative of a periodic line with spacing `h`.
pub struct SpectralLine {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
}

impl SpectralLine {
    pub fn new(n: usize, h: f64) -> Self {
        let mut planner = FftPlanner::new();
        let period = n as f64 * h;
        let wavenumbers = (0..n)
            .map(|j| {
                let k = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
                2.0 * std::f64::consts::PI * k / period
            })
            .collect();
        Self { n, fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n), wavenumbers }
    }

    pub fn apply(&self, line: &[Complex64], order: u32, out: &mut [Complex64]) {
        let mut buf = line.to_vec();
        self.fwd.process(&mut buf);
        for (j, b) in buf.iter_mut().enumerate() {
            let k = self.wavenumbers[j];
            // the Nyquist mode has no consistent odd derivative
            let nyquist = self.n.is_multiple_of(2) && j == self.n / 2;
            *b *= match order {
                1 if nyquist => Complex64::new(0.0, 0.0),
                1 => Complex64::new(0.0, k),
                _ => Complex64::new(-k * k, 0.0),
            };
        }
        self.inv.process(&mut buf);
        let scale = 1.0 / self.n as f64;
        for (o, b) in out.iter_mut().zip(buf) {
            *o = b * scale;
        }
    }
}

/// Fourth-order finite-difference derivative of a line.
pub fn fd4_line(line: &[Complex64], h: f64, order: u32, out: &mut [Complex64]) {
    let n = line.len();
    let f = line;
    if order == 1 {
        let c = 1.0 / (12.0 * h);
        for i in 2..n - 2 {
            out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * c;
        }
        out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * c;
        out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * c;
        let m = n - 1;
        out[m] = -(-25.0 * f[m] + 48.0 * f[m - 1] - 36.0 * f[m - 2] + 16.0 * f[m - 3] - 3.0 * f[m - 4]) * c;
        out[m - 1] = -(-3.0 * f[m] - 10.0 * f[m - 1] + 18.0 * f[m - 2] - 6.0 * f[m - 3] + f[m - 4]) * c;
    } else {
        let c = 1.0 / (12.0 * h * h);
        for i in 2..n - 2 {
            out[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) * c;
        }
        let edge = |g: &dyn Fn(usize) -> Complex64| {
            (
                (45.0 * g(0) - 154.0 * g(1) + 214.0 * g(2) - 156.0 * g(3) + 61.0 * g(4) - 10.0 * g(5)) * c,
                (10.0 * g(0) - 15.0 * g(1) - 4.0 * g(2) + 14.0 * g(3) - 6.0 * g(4) + g(5)) * c,
            )
        };
        let (a, b) = edge(&|i| f[i]);
        out[0] = a;
        out[1] = b;
        let (a, b) = edge(&|i| f[n - 1 - i]);
        out[n - 1] = a;
        out[n - 2] = b;
    }
}

/// Derivative of order 1 or 2 along `axis`.
pub fn spectral_derivative(
    f: &GridFunction,
    axis: usize,
    order: u32,
    scheme: DerivativeScheme,
) -> Result<GridFunction> {
    if order == 0 || order > 2 {
        return Err(Error::InvalidArgument(format!("derivative order must be 1 or 2, got {order}")));
    }
    if axis >= f.grid.dim() {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
    }
    let values = derivative_values(&f.values, &f.grid.shape(), axis, f.grid.axis(axis).spacing(), order, scheme);
    Ok(GridFunction { grid: f.grid.clone(), values })
}

/// Raw-slice version of [`spectral_derivative`].
pub fn derivative_values(
    values: &[Complex64],
    shape: &[usize],
    axis: usize,
    h: f64,
    order: u32,
    scheme: DerivativeScheme,
) -> Vec<Complex64> {
    match scheme {
        DerivativeScheme::Spectral => {
            let sl = SpectralLine::new(shape[axis], h);
            map_lines(values, shape, axis, |l, o| sl.apply(l, order, o))
        }
        DerivativeScheme::FourthOrder => map_lines(values, shape, axis, |l, o| fd4_line(l, h, order, o)),
    }
}

/// Anchored inverse derivative of a line:
/// `g(x_i) = 1/(n-1)! * sum_j w_j (x_i - x_j)^(n-1) f(x_j)` with trapezoid weights on `[x_0, x_i]`.
pub fn inverse_derivative_line(line: &[Complex64], h: f64, order: u32, out: &mut [Complex64]) {
    let n = line.len();
    if order == 1 {
        out[0] = Complex64::new(0.0, 0.0);
        for i in 1..n {
            out[i] = out[i - 1] + 0.5 * h * (line[i - 1] + line[i]);
        }
        return;
    }
    // (i - j)^(p) expanded binomially against prefix moments sum_j j^k f_j.
    let p = (order - 1) as usize;
    let mut binom = vec![1.0; p + 1];
    for k in 1..=p {
        binom[k] = binom[k - 1] * (p + 1 - k) as f64 / k as f64;
    }
    let fact: f64 = (1..=p).map(|k| k as f64).product();
    let scale = h.powi(order as i32) / fact;
    let mut moments = vec![Complex64::new(0.0, 0.0); p + 1];
    for i in 0..n {
        let w0 = if i == 0 { 0.5 } else { 1.0 };
        let mut jp = 1.0;
        for m in moments.iter_mut() {
            *m += w0 * jp * line[i];
            jp *= i as f64;
        }
        if i == 0 {
            out[0] = Complex64::new(0.0, 0.0);
            continue;
        }
        // sum_{j<=i} w_j (i-j)^p f_j, the j = i term carries weight 1/2 but vanishes for p >= 1
        let fi = i as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..=p {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            acc += binom[k] * sign * fi.powi((p - k) as i32) * moments[k];
        }
        out[i] = acc * scale;
    }
}

/// Discrete `d^-n/dx^-n` along `axis`, anchored at the grid minimum.
pub fn inverse_derivative(f: &GridFunction, axis: usize, order: i32) -> Result<GridFunction> {
    if order <= 0 {
        return Err(Error::InvalidArgument(format!("inverse derivative order must be >= 1, got {order}")));
    }
    if axis >= f.grid.dim() {
        return Err(Error::InvalidArgument(format!("axis {axis} out of range")));
    }
    let h = f.grid.axis(axis).spacing();
    let values = inverse_derivative_values(&f.values, &f.grid.shape(), axis, h, order as u32);
    Ok(GridFunction { grid: f.grid.clone(), values })
}

pub fn inverse_derivative_values(
    values: &[Complex64],
    shape: &[usize],
    axis: usize,
    h: f64,
    order: u32,
) -> Vec<Complex64> {
    map_lines(values, shape, axis, |l, o| inverse_derivative_line(l, h, order, o))
}

/// Convenience check used by grids built from external data: a sampled coordinate list is uniform.
pub fn check_uniform(points: &[f64]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::InvalidGrid("need at least two points".into()));
    }
    let h = (points[points.len() - 1] - points[0]) / (points.len() - 1) as f64;
    for w in points.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs().max(1e-300) {
            return Err(Error::InvalidGrid("non-uniform axis".into()));
        }
    }
    Ok(h)
}

/// Inverse derivative of samples on an explicit coordinate list; rejects non-uniform spacing.
pub fn inverse_derivative_sampled(points: &[f64], values: &[Complex64], order: i32) -> Result<Vec<Complex64>> {
    if order <= 0 {
        return Err(Error::InvalidArgument(format!("inverse derivative order must be >= 1, got {order}")));
    }
    let h = check_uniform(points)?;
    let mut out = vec![Complex64::new(0.0, 0.0); values.len()];
    inverse_derivative_line(values, h, order as u32, &mut out);
    Ok(out)
}

