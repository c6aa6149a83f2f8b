//! Cell-centered discretization of functions on [0, 1].
//!
//! Cell `j` of an `N`-cell grid has center `x_j = (j + 1/2) / N` and width
//! `h = 1 / N`. Mirrored ghost cells on this grid implement the zero-flux
//! boundary condition exactly for the second-difference Laplacian.

use crate::error::{check_grid, Error, Result};

/// Cell center of cell `j` on an `n`-cell grid.
#[inline]
pub fn cell_center(j: usize, n: usize) -> f64 {
    (j as f64 + 0.5) / n as f64
}

/// Real samples at the cell centers of a uniform grid on [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    values: Vec<f64>,
}

impl GridFunction {
    /// Wraps samples; rejects empty input and non-finite entries.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::domain("grid function needs at least one cell"));
        }
        if let Some(j) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::domain(format!("non-finite sample at cell {j}")));
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "grid must have at least one cell");
        Self {
            values: vec![0.0; n],
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        assert!(n > 0, "grid must have at least one cell");
        Self { values: vec![c; n] }
    }

    /// Samples `f` at the cell centers.
    pub fn from_fn(n: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new((0..n).map(|j| f(cell_center(j, n))).collect())
    }

    /// Cell count `N`.
    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Cell width `h = 1/N`.
    #[inline]
    pub fn spacing(&self) -> f64 {
        1.0 / self.values.len() as f64
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn centers(&self) -> impl Iterator<Item = f64> + '_ {
        let n = self.len();
        (0..n).map(move |j| cell_center(j, n))
    }

    /// Midpoint-rule integral `h * sum(values)`.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spacing()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn ensure_same_grid(&self, other: &GridFunction) -> Result<()> {
        check_grid(self.len(), other.len())
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> Result<f64> {
        self.ensure_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// Pointwise product.
    pub fn mul(&self, other: &GridFunction) -> Result<GridFunction> {
        self.ensure_same_grid(other)?;
        Ok(GridFunction {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        GridFunction {
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }
}

impl AsRef<[f64]> for GridFunction {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centers_are_cell_midpoints() {
        let g = GridFunction::zeros(4);
        let c: Vec<f64> = g.centers().collect();
        assert_eq!(c, vec![0.125, 0.375, 0.625, 0.875]);
        assert_eq!(g.spacing(), 0.25);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(GridFunction::new(vec![1.0, f64::NAN]).is_err());
        assert!(GridFunction::new(vec![]).is_err());
    }

    #[test]
    fn mismatch_is_reported() {
        let a = GridFunction::zeros(3);
        let b = GridFunction::zeros(4);
        assert_eq!(
            a.mul(&b),
            Err(Error::GridMismatch {
                expected: 3,
                found: 4
            })
        );
    }
}
