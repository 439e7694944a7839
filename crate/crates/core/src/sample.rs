use std::ops::Range;

use nalgebra::{DMatrix, DVector, RowDVector};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};

/// Ordered collection of curves on one grid: row `n` is the curve `X_n`.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionSample {
    grid: Grid,
    data: DMatrix<f64>,
}

impl FunctionSample {
    pub fn new(grid: Grid, data: DMatrix<f64>) -> Result<Self> {
        if data.ncols() != grid.resolution() {
            return Err(Error::DimensionMismatch {
                expected: grid.resolution(),
                found: data.ncols(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("sample", "contains non-finite values"));
        }
        Ok(FunctionSample { grid, data })
    }

    pub fn from_curves(grid: Grid, curves: &[GridFunction]) -> Result<Self> {
        let mut data = DMatrix::zeros(curves.len(), grid.resolution());
        for (n, c) in curves.iter().enumerate() {
            grid.check(&c.grid())?;
            data.row_mut(n).copy_from(&c.values().transpose());
        }
        Ok(FunctionSample { grid, data })
    }

    pub(crate) fn from_raw(grid: Grid, data: DMatrix<f64>) -> Self {
        FunctionSample { grid, data }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn len(&self) -> usize {
        self.data.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.data.nrows() == 0
    }

    /// `N × T` matrix of values.
    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn curve(&self, n: usize) -> GridFunction {
        GridFunction::from_raw(self.grid, self.data.row(n).transpose())
    }

    pub fn curves(&self) -> impl Iterator<Item = GridFunction> + '_ {
        (0..self.len()).map(|n| self.curve(n))
    }

    pub fn mean(&self) -> GridFunction {
        let mean: RowDVector<f64> = self.data.row_mean();
        GridFunction::from_raw(self.grid, mean.transpose())
    }

    /// Curves with the sample mean subtracted.
    pub fn centered(&self) -> DMatrix<f64> {
        let mean = self.data.row_mean();
        let mut out = self.data.clone();
        for mut row in out.row_iter_mut() {
            row -= &mean;
        }
        out
    }

    pub fn slice(&self, range: Range<usize>) -> FunctionSample {
        let rows = range.end - range.start;
        FunctionSample {
            grid: self.grid,
            data: self.data.rows(range.start, rows).into_owned(),
        }
    }

    /// Adds `f` to every curve.
    pub fn shifted(&self, f: &GridFunction) -> Result<FunctionSample> {
        self.grid.check(&f.grid())?;
        let row = f.values().transpose();
        let mut data = self.data.clone();
        for mut r in data.row_iter_mut() {
            r += &row;
        }
        Ok(FunctionSample { grid: self.grid, data })
    }

    /// Adds `f` to the curves with index in `range`.
    pub fn shifted_range(&self, f: &GridFunction, range: Range<usize>) -> Result<FunctionSample> {
        self.grid.check(&f.grid())?;
        let row = f.values().transpose();
        let mut data = self.data.clone();
        for n in range {
            let mut r = data.row_mut(n);
            r += &row;
        }
        Ok(FunctionSample { grid: self.grid, data })
    }

    pub fn sub(&self, other: &FunctionSample) -> Result<FunctionSample> {
        self.grid.check(&other.grid)?;
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: other.len(),
            });
        }
        Ok(FunctionSample {
            grid: self.grid,
            data: &self.data - &other.data,
        })
    }

    /// Quadrature norm of every curve.
    pub fn norms(&self) -> DVector<f64> {
        let w = self.grid.weight();
        DVector::from_iterator(
            self.len(),
            self.data.row_iter().map(|r| (r.norm_squared() * w).sqrt()),
        )
    }
}
