use std::sync::Arc;

use crate::domain::{Grid, RegionMask};
use crate::error::DomainError;

/// Nodal scalar function on the active nodes of a grid.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Arc<Grid>,
    values: Vec<f64>,
}

impl PartialEq for ScalarField {
    fn eq(&self, other: &Self) -> bool {
        crate::domain::mask::same_grid(&self.grid, &other.grid) && self.values == other.values
    }
}

impl ScalarField {
    pub fn zeros(grid: &Arc<Grid>) -> Self {
        ScalarField { grid: Arc::clone(grid), values: vec![0.0; grid.len()] }
    }

    pub fn constant(grid: &Arc<Grid>, c: f64) -> Self {
        ScalarField { grid: Arc::clone(grid), values: vec![c; grid.len()] }
    }

    pub fn new(grid: &Arc<Grid>, values: Vec<f64>) -> Result<Self, DomainError> {
        if values.len() != grid.len() {
            return Err(DomainError::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(node) = values.iter().position(|v| !v.is_finite()) {
            return Err(DomainError::NonFinite { node });
        }
        Ok(ScalarField { grid: Arc::clone(grid), values })
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = grid.coords().iter().map(|&[x, y]| f(x, y)).collect();
        ScalarField { grid: Arc::clone(grid), values }
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Values on the boundary nodes, in boundary-slot order.
    pub fn gamma_values(&self) -> Vec<f64> {
        self.grid.gamma_nodes().iter().map(|&i| self.values[i]).collect()
    }

    /// `{v > threshold}`.
    pub fn positivity(&self, threshold: f64) -> RegionMask {
        RegionMask::from_fn(&self.grid, |i| self.values[i] > threshold)
    }

    pub fn max_abs_diff(&self, other: &ScalarField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Dirichlet energy `1/2 * integral |grad v|^2` with the edge-difference stencil.
    pub fn dirichlet_energy(&self) -> f64 {
        0.5 * gradient_inner(&self.grid, &self.values, &self.values)
    }
}

/// `integral grad a . grad b` with the same edge stencil as the Dirichlet energy.
///
/// Each lattice edge between two active nodes is visited once, so on the
/// lattice this is the sum over forward differences in every direction.
pub fn gradient_inner(grid: &Grid, a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for p in 0..grid.len() {
        // +x and +y directions only, so each edge counts once.
        for d in [1usize, 3] {
            if let Some(q) = grid.neighbor(p, d) {
                acc += (a[q] - a[p]) * (b[q] - b[p]);
            }
        }
    }
    acc * grid.edge_weight()
}

/// Free-standing form of [`ScalarField::dirichlet_energy`].
pub fn dirichlet_energy(field: &ScalarField) -> f64 {
    field.dirichlet_energy()
}
