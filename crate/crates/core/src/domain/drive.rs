use std::sync::Arc;

use crate::domain::{Grid, RegionMask};
use crate::error::DomainError;
use crate::field::ScalarField;

/// Piecewise-linear scalar function of time.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self, DomainError> {
        if times.is_empty() || times.len() != values.len() {
            return Err(DomainError::InvalidDrive(format!(
                "need matching non-empty time and value lists, got {} and {}",
                times.len(),
                values.len()
            )));
        }
        if times.iter().chain(&values).any(|v| !v.is_finite()) {
            return Err(DomainError::InvalidDrive("non-finite sample".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(DomainError::InvalidDrive("sample times must be strictly increasing".into()));
        }
        Ok(TimeSeries { times, values })
    }

    /// `t -> slope * t` on `[0, end]`.
    pub fn ramp(slope: f64, end: f64) -> Result<Self, DomainError> {
        Self::new(vec![0.0, end], vec![0.0, slope * end])
    }

    pub fn constant(value: f64, end: f64) -> Result<Self, DomainError> {
        Self::new(vec![0.0, end], vec![value, value])
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Index `k` of the segment `[t_k, t_{k+1}]` containing `t` (clamped).
    fn segment(&self, t: f64) -> usize {
        let n = self.times.len();
        if n < 2 || t <= self.times[0] {
            return 0;
        }
        match self.times.binary_search_by(|s| s.partial_cmp(&t).unwrap()) {
            Ok(k) => k.min(n - 2),
            Err(k) => (k - 1).min(n - 2),
        }
    }

    pub fn value(&self, t: f64) -> f64 {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return self.values[0];
        }
        if t >= self.times[n - 1] {
            return self.values[n - 1];
        }
        let k = self.segment(t);
        let (t0, t1) = (self.times[k], self.times[k + 1]);
        let (v0, v1) = (self.values[k], self.values[k + 1]);
        v0 + (v1 - v0) * (t - t0) / (t1 - t0)
    }

    /// Right derivative at `t` (slope of the segment starting at or containing `t`).
    pub fn slope(&self, t: f64) -> f64 {
        if self.times.len() < 2 || t >= self.end() {
            return 0.0;
        }
        let k = self.segment(t);
        (self.values[k + 1] - self.values[k]) / (self.times[k + 1] - self.times[k])
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Running maximum `t -> sup_{s <= t} w(s)`: the smallest non-decreasing
    /// function above `w`. Exact, with the extra breakpoints where a rising
    /// segment overtakes the previous maximum.
    pub fn running_max(&self) -> TimeSeries {
        let mut times = vec![self.times[0]];
        let mut values = vec![self.values[0]];
        let mut m = self.values[0];
        for k in 0..self.times.len() - 1 {
            let (t0, t1) = (self.times[k], self.times[k + 1]);
            let (v0, v1) = (self.values[k], self.values[k + 1]);
            if v1 <= m {
                times.push(t1);
                values.push(m);
                continue;
            }
            if v0 < m {
                let tc = t0 + (m - v0) / (v1 - v0) * (t1 - t0);
                if tc > *times.last().unwrap() && tc < t1 {
                    times.push(tc);
                    values.push(m);
                }
            }
            times.push(t1);
            values.push(v1);
            m = v1;
        }
        TimeSeries { times, values }
    }

    /// Breakpoints of the series lying strictly inside `(a, b)`.
    pub fn breakpoints_between(&self, a: f64, b: f64) -> impl Iterator<Item = f64> + '_ {
        self.times.iter().copied().filter(move |&t| t > a && t < b)
    }
}

/// Time-dependent prescribed displacement on the boundary nodes.
///
/// Samples are linearly interpolated in time, so the drive is absolutely
/// continuous and its derivative is the exact segment slope. An optional
/// extension into the domain (vanishing outside the initial debonded set) can
/// be attached for the alternative work formula.
#[derive(Debug, Clone)]
pub struct BoundaryDrive {
    grid: Arc<Grid>,
    times: Vec<f64>,
    gamma_values: Vec<Vec<f64>>,
    extension: Option<Vec<Vec<f64>>>,
    bound: f64,
}

impl BoundaryDrive {
    pub fn new(grid: &Arc<Grid>, times: Vec<f64>, gamma_values: Vec<Vec<f64>>) -> Result<Self, DomainError> {
        if times.is_empty() || times.len() != gamma_values.len() {
            return Err(DomainError::InvalidDrive("need one boundary sample per time".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) || times.iter().any(|t| !t.is_finite()) {
            return Err(DomainError::InvalidDrive("sample times must be finite and strictly increasing".into()));
        }
        let mut bound: f64 = 0.0;
        for (k, sample) in gamma_values.iter().enumerate() {
            if sample.len() != grid.gamma_count() {
                return Err(DomainError::LengthMismatch { expected: grid.gamma_count(), got: sample.len() });
            }
            for &v in sample {
                if !v.is_finite() || v < 0.0 {
                    return Err(DomainError::InvalidDrive(format!(
                        "boundary value {v} at sample {k} violates 0 <= w"
                    )));
                }
                bound = bound.max(v);
            }
        }
        Ok(BoundaryDrive { grid: Arc::clone(grid), times, gamma_values, extension: None, bound })
    }

    /// Spatially uniform drive `w(t, x) = series(t)` on every boundary node.
    pub fn uniform(grid: &Arc<Grid>, series: &TimeSeries) -> Result<Self, DomainError> {
        let samples = series.values().iter().map(|&v| vec![v; grid.gamma_count()]).collect();
        Self::new(grid, series.times().to_vec(), samples)
    }

    /// `w(t, x) = series(t) * profile(x)` with a fixed boundary profile.
    pub fn separable(grid: &Arc<Grid>, series: &TimeSeries, profile: &[f64]) -> Result<Self, DomainError> {
        let samples = series
            .values()
            .iter()
            .map(|&v| profile.iter().map(|&p| v * p).collect())
            .collect();
        Self::new(grid, series.times().to_vec(), samples)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn start(&self) -> f64 {
        self.times[0]
    }

    pub fn end(&self) -> f64 {
        *self.times.last().unwrap()
    }

    /// Upper bound `M` of the boundary data.
    pub fn bound(&self) -> f64 {
        self.bound
    }

    fn locate(&self, t: f64) -> (usize, f64) {
        let n = self.times.len();
        if n == 1 || t <= self.times[0] {
            return (0, 0.0);
        }
        if t >= self.times[n - 1] {
            return (n - 2, 1.0);
        }
        let k = match self.times.binary_search_by(|s| s.partial_cmp(&t).unwrap()) {
            Ok(k) => k.min(n - 2),
            Err(k) => k - 1,
        };
        (k, (t - self.times[k]) / (self.times[k + 1] - self.times[k]))
    }

    fn interpolate(samples: &[Vec<f64>], k: usize, s: f64) -> Vec<f64> {
        if samples.len() == 1 {
            return samples[0].clone();
        }
        samples[k]
            .iter()
            .zip(&samples[k + 1])
            .map(|(a, b)| a + (b - a) * s)
            .collect()
    }

    /// Boundary values `w(t)` in boundary-slot order.
    pub fn gamma_at(&self, t: f64) -> Vec<f64> {
        let (k, s) = self.locate(t);
        Self::interpolate(&self.gamma_values, k, s)
    }

    /// Mean rate `(w(b) - w(a)) / (b - a)`; equals the exact slope when no
    /// breakpoint lies inside `(a, b)`.
    pub fn rate_between(&self, a: f64, b: f64) -> Vec<f64> {
        let (wa, wb) = (self.gamma_at(a), self.gamma_at(b));
        wa.iter().zip(&wb).map(|(x, y)| (y - x) / (b - a)).collect()
    }

    /// Right derivative `w'(t)` (left derivative at the final time).
    pub fn rate_at(&self, t: f64) -> Vec<f64> {
        if self.times.len() < 2 {
            return vec![0.0; self.grid.gamma_count()];
        }
        let k = if t >= self.end() {
            self.times.len() - 2
        } else {
            match self.times.binary_search_by(|s| s.partial_cmp(&t).unwrap()) {
                Ok(k) => k,
                Err(0) => 0,
                Err(k) => k - 1,
            }
        };
        let dt = self.times[k + 1] - self.times[k];
        self.gamma_values[k]
            .iter()
            .zip(&self.gamma_values[k + 1])
            .map(|(a, b)| (b - a) / dt)
            .collect()
    }

    pub fn has_extension(&self) -> bool {
        self.extension.is_some()
    }

    /// Attach an extension field per sample. Each must agree with the boundary
    /// data on the boundary nodes and vanish outside `a0`.
    pub fn with_extension(mut self, fields: Vec<ScalarField>, a0: &RegionMask) -> Result<Self, DomainError> {
        if fields.len() != self.times.len() {
            return Err(DomainError::InvalidDrive("need one extension field per sample".into()));
        }
        let mut ext = Vec::with_capacity(fields.len());
        for (k, f) in fields.into_iter().enumerate() {
            if f.values().len() != self.grid.len() {
                return Err(DomainError::GridMismatch);
            }
            for (slot, &g) in self.grid.gamma_nodes().iter().enumerate() {
                let (a, b) = (f.values()[g], self.gamma_values[k][slot]);
                if (a - b).abs() > 1e-12 * (1.0 + b.abs()) {
                    return Err(DomainError::InvalidDrive(format!(
                        "extension at sample {k} differs from the boundary datum at node {g}"
                    )));
                }
            }
            for (node, &v) in f.values().iter().enumerate() {
                if !a0.contains(node) && v != 0.0 && !self.grid.is_gamma(node) {
                    return Err(DomainError::InvalidDrive(format!(
                        "extension at sample {k} does not vanish outside the initial set (node {node})"
                    )));
                }
                if v < 0.0 {
                    return Err(DomainError::InvalidDrive(format!("negative extension at node {node}")));
                }
            }
            ext.push(f.into_values());
        }
        self.extension = Some(ext);
        Ok(self)
    }

    /// Extension `phi(x) * w(t, nearest boundary node)` with a linear cut-off
    /// `phi` that equals one on the boundary and reaches zero before leaving
    /// `a0`. Requires `a0` to contain a neighbourhood of the boundary.
    pub fn with_cutoff_extension(self, a0: &RegionMask) -> Result<Self, DomainError> {
        let grid = Arc::clone(&self.grid);
        let dist = grid.distance_to_gamma();
        let reach = (0..grid.len())
            .filter(|&i| !a0.contains(i))
            .map(|i| dist[i])
            .fold(f64::INFINITY, f64::min);
        if !(reach > 0.0) {
            return Err(DomainError::InvalidDrive(
                "cut-off extension needs the initial set to contain a neighbourhood of the boundary".into(),
            ));
        }
        let nearest: Vec<usize> = (0..grid.len())
            .map(|i| {
                let (px, py) = grid.lattice_pos(i);
                grid.gamma_nodes()
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, &g)| {
                        let (gx, gy) = grid.lattice_pos(g);
                        let (dx, dy) = (px as i64 - gx as i64, py as i64 - gy as i64);
                        dx * dx + dy * dy
                    })
                    .map(|(slot, _)| slot)
                    .unwrap()
            })
            .collect();
        let fields = self
            .gamma_values
            .iter()
            .map(|sample| {
                let values = (0..grid.len())
                    .map(|i| {
                        if grid.is_gamma(i) {
                            return sample[grid.gamma_slot(i).unwrap()];
                        }
                        let phi = if reach.is_finite() { (1.0 - dist[i] / reach).max(0.0) } else { 1.0 };
                        if a0.contains(i) { phi * sample[nearest[i]] } else { 0.0 }
                    })
                    .collect();
                ScalarField::new(&grid, values)
            })
            .collect::<Result<Vec<_>, _>>()?;
        self.with_extension(fields, a0)
    }

    /// Extension field at time `t`, if one is attached.
    pub fn extension_at(&self, t: f64) -> Option<ScalarField> {
        let ext = self.extension.as_ref()?;
        let (k, s) = self.locate(t);
        let values = Self::interpolate(ext, k, s);
        ScalarField::new(&self.grid, values).ok()
    }

    /// Mean rate of the extension over `[a, b]`.
    pub fn extension_rate_between(&self, a: f64, b: f64) -> Option<ScalarField> {
        let (ea, eb) = (self.extension_at(a)?, self.extension_at(b)?);
        let values = ea.values().iter().zip(eb.values()).map(|(x, y)| (y - x) / (b - a)).collect();
        ScalarField::new(&self.grid, values).ok()
    }
}
