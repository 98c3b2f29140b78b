//! Real-valued samples of a function at the grid nodes.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::Grid;

/// A function sampled on its grid. Every constructor that admits external
/// data rejects non-finite values, so a `Field` is finite by construction;
/// blow-up detection during time stepping happens at the stepper level.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::LengthMismatch {
                got: values.len(),
                expected: grid.n(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Field { grid, values })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let n = grid.n();
        Field {
            grid,
            values: vec![0.0; n],
        }
    }

    pub fn constant(grid: Arc<Grid>, value: f64) -> Result<Self> {
        let n = grid.n();
        Field::new(grid, vec![value; n])
    }

    /// Sample `f` at every node.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.nodes().iter().map(|&x| f(x)).collect();
        Field::new(grid, values)
    }

    /// Internal constructor for values produced by our own arithmetic.
    /// Skips the finiteness scan; the stepper re-checks every stage.
    pub(crate) fn from_values_unchecked(grid: Arc<Grid>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n());
        Field { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.len() as f64
    }

    pub fn same_grid(&self, other: &Field) -> bool {
        Arc::ptr_eq(&self.grid, &other.grid) || self.grid == other.grid
    }

    /// `self + a * other`, node by node.
    pub fn axpy(&self, a: f64, other: &Field) -> Field {
        assert!(self.same_grid(other), "axpy across different grids");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x + a * y)
            .collect();
        Field::from_values_unchecked(self.grid.clone(), values)
    }

    pub fn scale(&self, a: f64) -> Field {
        let values = self.values.iter().map(|x| a * x).collect();
        Field::from_values_unchecked(self.grid.clone(), values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field {
        let values = self.values.iter().map(|&x| f(x)).collect();
        Field::from_values_unchecked(self.grid.clone(), values)
    }

    /// Pointwise product (no dealiasing; see `spectral::dealiased_product`
    /// for the filtered version used inside right-hand sides).
    pub fn product(&self, other: &Field) -> Field {
        assert!(self.same_grid(other), "product across different grids");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(x, y)| x * y)
            .collect();
        Field::from_values_unchecked(self.grid.clone(), values)
    }
}
