use std::sync::Arc;

use crate::domain::{Grid, RegionMask};
use crate::error::DomainError;

/// Adhesion toughness per node (energy per unit area).
///
/// Always normalised to vanish on the initial debonded set and validated to be
/// strictly positive everywhere else.
#[derive(Debug, Clone, PartialEq)]
pub struct ToughnessField {
    values: Vec<f64>,
    grid_len: usize,
}

impl ToughnessField {
    pub fn new(grid: &Arc<Grid>, mut values: Vec<f64>, a0: &RegionMask) -> Result<Self, DomainError> {
        if values.len() != grid.len() {
            return Err(DomainError::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if a0.bits().len() != grid.len() {
            return Err(DomainError::GridMismatch);
        }
        for (node, v) in values.iter_mut().enumerate() {
            if a0.contains(node) {
                *v = 0.0;
                continue;
            }
            if v.is_nan() || v.is_infinite() {
                return Err(DomainError::NonFinite { node });
            }
            if *v < 0.0 {
                return Err(DomainError::NegativeToughness { node, value: *v });
            }
            if *v == 0.0 {
                return Err(DomainError::VanishingToughness { node });
            }
        }
        Ok(ToughnessField { values, grid_len: grid.len() })
    }

    pub fn constant(grid: &Arc<Grid>, c: f64, a0: &RegionMask) -> Result<Self, DomainError> {
        Self::new(grid, vec![c; grid.len()], a0)
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> f64, a0: &RegionMask) -> Result<Self, DomainError> {
        let values = grid.coords().iter().map(|&[x, y]| f(x, y)).collect();
        Self::new(grid, values, a0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, node: usize) -> f64 {
        self.values[node]
    }

    pub fn len(&self) -> usize {
        self.grid_len
    }

    pub fn is_empty(&self) -> bool {
        self.grid_len == 0
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// `integral_set kappa` with lumped node volumes.
    pub fn integral(&self, grid: &Grid, set: &RegionMask) -> f64 {
        set.iter().map(|i| self.values[i] * grid.volume(i)).sum()
    }
}
