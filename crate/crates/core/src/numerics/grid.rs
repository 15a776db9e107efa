use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_AXIS_POINTS: usize = 8;

/// A uniform axis with `n` nodes from `min` to `max` inclusive.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub n: usize,
}

impl Axis {
    pub fn new(min: f64, max: f64, n: usize) -> Result<Self> {
        if n < MIN_AXIS_POINTS {
            return Err(Error::InvalidGrid(format!("axis needs at least {MIN_AXIS_POINTS} points, got {n}")));
        }
        if !(min.is_finite() && max.is_finite() && max > min) {
            return Err(Error::InvalidGrid(format!("axis bounds [{min}, {max}] are not increasing")));
        }
        Ok(Self { min, max, n })
    }

    /// Symmetric axis `[-half_width, half_width]`.
    pub fn symmetric(half_width: f64, n: usize) -> Result<Self> {
        Self::new(-half_width, half_width, n)
    }

    /// Axis with given spacing, centred on zero.
    pub fn centered_with_spacing(spacing: f64, n: usize) -> Result<Self> {
        let half = 0.5 * spacing * (n as f64 - 1.0);
        Self::new(-half, half, n)
    }

    pub fn spacing(&self) -> f64 {
        (self.max - self.min) / (self.n as f64 - 1.0)
    }

    pub fn point(&self, i: usize) -> f64 {
        self.min + self.spacing() * i as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.point(i)).collect()
    }

    pub fn extent(&self) -> f64 {
        self.max - self.min
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.min - 1e-12 * self.extent() && x <= self.max + 1e-12 * self.extent()
    }

    /// Fractional index of `x` (may lie outside `0..n-1`).
    pub fn fractional_index(&self, x: f64) -> f64 {
        (x - self.min) / self.spacing()
    }
}

/// Tensor-product grid of 1 to 3 uniform axes. Samples are stored row-major
/// (last axis fastest).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    axes: Vec<Axis>,
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() || axes.len() > 3 {
            return Err(Error::InvalidGrid(format!("dimension must be 1..=3, got {}", axes.len())));
        }
        for a in &axes {
            Axis::new(a.min, a.max, a.n)?;
        }
        Ok(Self { axes })
    }

    pub fn uniform(dim: usize, half_width: f64, n: usize) -> Result<Self> {
        Self::new(vec![Axis::symmetric(half_width, n)?; dim])
    }

    pub fn line(axis: Axis) -> Self {
        Self { axes: vec![axis] }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn axis(&self, k: usize) -> &Axis {
        &self.axes[k]
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.n).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn shape(&self) -> Vec<usize> {
        self.axes.iter().map(|a| a.n).collect()
    }

    /// Volume element `prod h_k`.
    pub fn cell_volume(&self) -> f64 {
        self.axes.iter().map(Axis::spacing).product()
    }

    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.dim()];
        for k in (0..self.dim().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.axes[k + 1].n;
        }
        s
    }

    pub fn multi_index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for k in (0..self.dim()).rev() {
            idx[k] = flat % self.axes[k].n;
            flat /= self.axes[k].n;
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (&i, a)| acc * a.n + i)
    }

    pub fn point(&self, flat: usize) -> Vec<f64> {
        self.multi_index(flat)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.point(i))
            .collect()
    }

    pub fn points(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|i| self.point(i)).collect()
    }

    pub fn contains(&self, q: &[f64]) -> bool {
        q.len() == self.dim() && q.iter().zip(&self.axes).all(|(&x, a)| a.contains(x))
    }

    /// Indices of nodes on the outer boundary (any axis index at 0 or n-1).
    pub fn boundary_indices(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&f| {
                self.multi_index(f)
                    .iter()
                    .zip(&self.axes)
                    .any(|(&i, a)| i == 0 || i + 1 == a.n)
            })
            .collect()
    }

    pub fn same_shape(&self, other: &Grid) -> bool {
        self.axes.len() == other.axes.len()
            && self.axes.iter().zip(&other.axes).all(|(a, b)| {
                a.n == b.n
                    && (a.min - b.min).abs() <= 1e-12 * a.extent()
                    && (a.max - b.max).abs() <= 1e-12 * a.extent()
            })
    }
}

/// Complex samples over a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} samples for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::InvalidArgument("grid function has non-finite samples".into()));
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::new(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_fn(grid: Grid, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.len()).map(|i| f(&grid.point(i))).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Grid) -> Self {
        let n = grid.len();
        Self { grid, values: vec![Complex64::new(0.0, 0.0); n] }
    }

    pub fn real_parts(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Sum of samples times the cell volume.
    pub fn integral(&self) -> Complex64 {
        self.values.iter().sum::<Complex64>() * self.grid.cell_volume()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }

    pub fn scaled(&self, s: Complex64) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|v| v * s).collect() }
    }

    pub fn axpy(&self, a: Complex64, other: &GridFunction) -> Result<Self> {
        if !self.grid.same_shape(&other.grid) {
            return Err(Error::GridMismatch("axpy on different grids".into()));
        }
        Ok(Self {
            grid: self.grid.clone(),
            values: self.values.iter().zip(&other.values).map(|(x, y)| x + a * y).collect(),
        })
    }
}
