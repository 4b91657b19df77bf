use std::sync::Arc;

use crate::domain::Grid;
use crate::error::DomainError;

/// Node indicator of a subset of the domain (debonded regions, positivity sets).
///
/// The measure is kept as an integer number of volume units so that
/// set algebra and measure bookkeeping agree exactly.
#[derive(Debug, Clone)]
pub struct RegionMask {
    grid: Arc<Grid>,
    bits: Vec<bool>,
    units: u64,
}

impl PartialEq for RegionMask {
    fn eq(&self, other: &Self) -> bool {
        same_grid(&self.grid, &other.grid) && self.bits == other.bits
    }
}

pub(crate) fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
    Arc::ptr_eq(a, b)
        || (a.len() == b.len()
            && a.lattice_dims() == b.lattice_dims()
            && a.spacing() == b.spacing()
            && a.shape() == b.shape()
            && a.gamma_nodes() == b.gamma_nodes())
}

impl RegionMask {
    pub fn empty(grid: &Arc<Grid>) -> Self {
        RegionMask { grid: Arc::clone(grid), bits: vec![false; grid.len()], units: 0 }
    }

    pub fn full(grid: &Arc<Grid>) -> Self {
        Self::from_fn(grid, |_| true)
    }

    pub fn from_bits(grid: &Arc<Grid>, bits: Vec<bool>) -> Result<Self, DomainError> {
        if bits.len() != grid.len() {
            return Err(DomainError::LengthMismatch { expected: grid.len(), got: bits.len() });
        }
        let units = count_units(grid, &bits);
        Ok(RegionMask { grid: Arc::clone(grid), bits, units })
    }

    pub fn from_fn(grid: &Arc<Grid>, f: impl Fn(usize) -> bool) -> Self {
        let bits: Vec<bool> = (0..grid.len()).map(f).collect();
        let units = count_units(grid, &bits);
        RegionMask { grid: Arc::clone(grid), bits, units }
    }

    /// Nodes whose coordinates satisfy `f(x, y)`.
    pub fn from_coords(grid: &Arc<Grid>, f: impl Fn(f64, f64) -> bool) -> Self {
        Self::from_fn(grid, |i| {
            let [x, y] = grid.coord(i);
            f(x, y)
        })
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn contains(&self, node: usize) -> bool {
        self.bits[node]
    }

    pub fn set(&mut self, node: usize, value: bool) {
        if self.bits[node] != value {
            let u = u64::from(self.grid.volume_units(node));
            if value {
                self.units += u;
            } else {
                self.units -= u;
            }
            self.bits[node] = value;
        }
    }

    pub fn count(&self) -> usize {
        self.bits.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        !self.bits.iter().any(|&b| b)
    }

    /// Measure in volume units (exact).
    pub fn measure_units(&self) -> u64 {
        self.units
    }

    pub fn measure(&self) -> f64 {
        self.units as f64 * self.grid.unit_volume()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i)
    }

    fn check(&self, other: &RegionMask) -> Result<(), DomainError> {
        if same_grid(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(DomainError::GridMismatch)
        }
    }

    fn zip(&self, other: &RegionMask, op: impl Fn(bool, bool) -> bool) -> Result<RegionMask, DomainError> {
        self.check(other)?;
        let bits: Vec<bool> = self.bits.iter().zip(&other.bits).map(|(&a, &b)| op(a, b)).collect();
        RegionMask::from_bits(&self.grid, bits)
    }

    pub fn union(&self, other: &RegionMask) -> Result<RegionMask, DomainError> {
        self.zip(other, |a, b| a || b)
    }

    pub fn intersection(&self, other: &RegionMask) -> Result<RegionMask, DomainError> {
        self.zip(other, |a, b| a && b)
    }

    /// `self \ other`.
    pub fn difference(&self, other: &RegionMask) -> Result<RegionMask, DomainError> {
        self.zip(other, |a, b| a && !b)
    }

    pub fn complement(&self) -> RegionMask {
        RegionMask::from_fn(&self.grid, |i| !self.bits[i])
    }

    pub fn is_subset(&self, other: &RegionMask) -> Result<bool, DomainError> {
        self.check(other)?;
        Ok(self.bits.iter().zip(&other.bits).all(|(&a, &b)| !a || b))
    }

    /// First node that is in `self` but not in `other`.
    pub fn first_escape(&self, other: &RegionMask) -> Result<Option<usize>, DomainError> {
        self.check(other)?;
        Ok(self.bits.iter().zip(&other.bits).position(|(&a, &b)| a && !b))
    }

    /// Nodes outside the set with at least one neighbour inside it.
    pub fn outer_frontier(&self) -> RegionMask {
        RegionMask::from_fn(&self.grid, |i| {
            !self.bits[i] && self.grid.neighbors(i).any(|q| self.bits[q])
        })
    }

    /// Nodes inside the set with at least one neighbour outside it.
    pub fn inner_frontier(&self) -> RegionMask {
        RegionMask::from_fn(&self.grid, |i| {
            self.bits[i] && self.grid.neighbors(i).any(|q| !self.bits[q])
        })
    }

    /// All nodes within Euclidean distance `radius` of the set.
    pub fn dilate(&self, radius: f64) -> RegionMask {
        let r = self.grid.lattice_units(radius);
        if r <= 0.0 || self.is_empty() {
            return self.clone();
        }
        let reach = r.floor() as i64;
        let r2 = r * r;
        let grid = &self.grid;
        let mut out = self.clone();
        for p in self.iter() {
            let (px, py) = grid.lattice_pos(p);
            let ylim = if grid.dim() == 1 { 0 } else { reach };
            for oy in -ylim..=ylim {
                for ox in -reach..=reach {
                    if ((ox * ox + oy * oy) as f64) > r2 {
                        continue;
                    }
                    let (qx, qy) = (px as i64 + ox, py as i64 + oy);
                    if qx < 0 || qy < 0 {
                        continue;
                    }
                    if let Some(q) = grid.node_at(qx as usize, qy as usize) {
                        out.set(q, true);
                    }
                }
            }
        }
        out
    }
}

fn count_units(grid: &Grid, bits: &[bool]) -> u64 {
    bits.iter()
        .enumerate()
        .filter(|(_, &b)| b)
        .map(|(i, _)| u64::from(grid.volume_units(i)))
        .sum()
}
