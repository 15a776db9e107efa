use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::grid::{Grid, GridFunction};
use crate::error::{Error, Result};

/// Dense complex operator from functions on `domain` to functions on `codomain`.
#[derive(Debug, Clone)]
pub struct LinearGridOperator {
    pub domain: Grid,
    pub codomain: Grid,
    pub matrix: DMatrix<Complex64>,
}

impl LinearGridOperator {
    pub fn new(domain: Grid, codomain: Grid, matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() != codomain.len() || matrix.ncols() != domain.len() {
            return Err(Error::GridMismatch(format!(
                "matrix is {}x{}, grids need {}x{}",
                matrix.nrows(),
                matrix.ncols(),
                codomain.len(),
                domain.len()
            )));
        }
        Ok(Self { domain, codomain, matrix })
    }

    /// Build the matrix column by column from a linear map on sample vectors.
    pub fn from_map(domain: Grid, codomain: Grid, map: impl Fn(&[Complex64]) -> Vec<Complex64>) -> Result<Self> {
        let n = domain.len();
        let m = codomain.len();
        let mut matrix = DMatrix::zeros(m, n);
        let mut e = vec![Complex64::new(0.0, 0.0); n];
        for j in 0..n {
            e[j] = Complex64::new(1.0, 0.0);
            let col = map(&e);
            if col.len() != m {
                return Err(Error::GridMismatch("map output length differs from codomain".into()));
            }
            for i in 0..m {
                matrix[(i, j)] = col[i];
            }
            e[j] = Complex64::new(0.0, 0.0);
        }
        Self::new(domain, codomain, matrix)
    }

    pub fn identity(grid: Grid) -> Self {
        let n = grid.len();
        Self { domain: grid.clone(), codomain: grid, matrix: DMatrix::identity(n, n) }
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        if !f.grid.same_shape(&self.domain) {
            return Err(Error::GridMismatch("operand not on operator domain".into()));
        }
        let v = DVector::from_column_slice(&f.values);
        let out = &self.matrix * v;
        GridFunction::new(self.codomain.clone(), out.as_slice().to_vec())
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &LinearGridOperator) -> Result<Self> {
        if !other.codomain.same_shape(&self.domain) {
            return Err(Error::GridMismatch("composition grids differ".into()));
        }
        Self::new(other.domain.clone(), self.codomain.clone(), &self.matrix * &other.matrix)
    }

    pub fn add(&self, other: &LinearGridOperator, scale: Complex64) -> Result<Self> {
        if !other.domain.same_shape(&self.domain) || !other.codomain.same_shape(&self.codomain) {
            return Err(Error::GridMismatch("sum grids differ".into()));
        }
        Self::new(self.domain.clone(), self.codomain.clone(), &self.matrix + &other.matrix * scale)
    }
}
