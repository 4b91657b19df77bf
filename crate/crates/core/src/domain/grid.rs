//! Uniform Cartesian discretisation of the reference configuration.
//!
//! Nodes live on a lattice with spacing `dx`. Annuli are realised by masking
//! out lattice points outside the ring; inactive points carry no unknowns and
//! do not appear in any of the per-node arrays, which are all indexed by the
//! *active* node index.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::DomainError;

const NONE: u32 = u32::MAX;

/// Geometry of the reference configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainShape {
    /// The interval `(0, length)`.
    Interval { length: f64 },
    /// The rectangle `(0, width) x (0, height)`.
    Rectangle { width: f64, height: f64 },
    /// The ring `inner <= |x| <= outer` centred at the origin.
    Annulus { inner: f64, outer: f64 },
}

/// A boundary portion that can be selected as the Dirichlet part.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryFace {
    Left,
    Right,
    Bottom,
    Top,
    InnerCircle,
    OuterCircle,
}

/// Everything needed to build a [`Grid`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub shape: DomainShape,
    pub spacing: f64,
    pub gamma: Vec<BoundaryFace>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeTag {
    Interior,
    /// Dirichlet boundary: the prescribed displacement acts here.
    Gamma,
    /// Remaining boundary, homogeneous Neumann.
    Neumann,
}

/// Direction order used by [`Grid::neighbor`]: -x, +x, -y, +y.
pub const DIRECTIONS: [(i64, i64); 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

#[derive(Debug, Clone)]
pub struct Grid {
    shape: DomainShape,
    dim: usize,
    spacing: f64,
    nx: usize,
    ny: usize,
    origin: [f64; 2],
    lattice_to_active: Vec<u32>,
    active: Vec<usize>,
    coords: Vec<[f64; 2]>,
    neighbors: Vec<[u32; 4]>,
    tags: Vec<NodeTag>,
    gamma: Vec<usize>,
    gamma_slot: Vec<u32>,
    volume_units: Vec<u8>,
}

fn lattice_count(extent: f64, spacing: f64, what: &str) -> Result<usize, DomainError> {
    if !(extent > 0.0) || !extent.is_finite() {
        return Err(DomainError::InvalidExtent(format!("{what} must be positive, got {extent}")));
    }
    let cells = (extent / spacing).round();
    if cells < 1.0 || (cells * spacing - extent).abs() > 1e-9 * extent.max(spacing) {
        return Err(DomainError::InvalidExtent(format!(
            "{what} = {extent} is not a multiple of the spacing {spacing}"
        )));
    }
    Ok(cells as usize)
}

impl Grid {
    pub fn build(spec: &GridSpec) -> Result<Grid, DomainError> {
        let dx = spec.spacing;
        if !(dx > 0.0) || !dx.is_finite() {
            return Err(DomainError::NonPositiveSpacing(dx));
        }
        if spec.gamma.is_empty() {
            return Err(DomainError::EmptyGamma);
        }
        let (dim, nx, ny, origin) = match spec.shape {
            DomainShape::Interval { length } => {
                let n = lattice_count(length, dx, "interval length")?;
                (1, n + 1, 1, [0.0, 0.0])
            }
            DomainShape::Rectangle { width, height } => {
                let n = lattice_count(width, dx, "rectangle width")?;
                let m = lattice_count(height, dx, "rectangle height")?;
                (2, n + 1, m + 1, [0.0, 0.0])
            }
            DomainShape::Annulus { inner, outer } => {
                if !(inner > 0.0) || !(outer > inner) {
                    return Err(DomainError::InvalidExtent(format!(
                        "annulus needs 0 < inner < outer, got inner = {inner}, outer = {outer}"
                    )));
                }
                let n = lattice_count(outer, dx, "annulus outer radius")?;
                let origin = -(n as f64) * dx;
                (2, 2 * n + 1, 2 * n + 1, [origin, origin])
            }
        };

        let lattice_coord = |ix: usize, iy: usize| -> [f64; 2] {
            let x = origin[0] + ix as f64 * dx;
            let y = if dim == 1 { 0.0 } else { origin[1] + iy as f64 * dx };
            [x, y]
        };
        let inside = |p: [f64; 2]| -> bool {
            match spec.shape {
                DomainShape::Annulus { inner, outer } => {
                    let r = p[0].hypot(p[1]);
                    r >= inner * (1.0 - 1e-12) && r <= outer * (1.0 + 1e-12)
                }
                _ => true,
            }
        };

        let mut lattice_to_active = vec![NONE; nx * ny];
        let mut active = Vec::new();
        let mut coords = Vec::new();
        for iy in 0..ny {
            for ix in 0..nx {
                let p = lattice_coord(ix, iy);
                if inside(p) {
                    lattice_to_active[iy * nx + ix] = active.len() as u32;
                    active.push(iy * nx + ix);
                    coords.push(p);
                }
            }
        }

        let axes = if dim == 1 { 2 } else { 4 };
        let mut neighbors = Vec::with_capacity(active.len());
        for &lat in &active {
            let (ix, iy) = ((lat % nx) as i64, (lat / nx) as i64);
            let mut nb = [NONE; 4];
            for (d, &(ox, oy)) in DIRECTIONS.iter().enumerate().take(axes) {
                let (jx, jy) = (ix + ox, iy + oy);
                if jx >= 0 && jy >= 0 && (jx as usize) < nx && (jy as usize) < ny {
                    nb[d] = lattice_to_active[jy as usize * nx + jx as usize];
                }
            }
            neighbors.push(nb);
        }

        let n = active.len();
        let mut volume_units = vec![0u8; n];
        let mut boundary = vec![false; n];
        for i in 0..n {
            let nb = &neighbors[i];
            let fx: u8 = if nb[0] != NONE && nb[1] != NONE { 2 } else { 1 };
            let fy: u8 = if dim == 1 || (nb[2] != NONE && nb[3] != NONE) { 2 } else { 1 };
            volume_units[i] = if dim == 1 { fx } else { fx * fy };
            boundary[i] = nb.iter().take(axes).any(|&q| q == NONE);
        }

        let mut is_gamma = vec![false; n];
        for face in &spec.gamma {
            for i in 0..n {
                if !boundary[i] {
                    continue;
                }
                let lat = active[i];
                let (ix, iy) = (lat % nx, lat / nx);
                let hit = match (face, spec.shape) {
                    (BoundaryFace::Left, DomainShape::Interval { .. } | DomainShape::Rectangle { .. }) => ix == 0,
                    (BoundaryFace::Right, DomainShape::Interval { .. } | DomainShape::Rectangle { .. }) => ix == nx - 1,
                    (BoundaryFace::Bottom, DomainShape::Rectangle { .. }) => iy == 0,
                    (BoundaryFace::Top, DomainShape::Rectangle { .. }) => iy == ny - 1,
                    (BoundaryFace::InnerCircle, DomainShape::Annulus { inner, .. }) => {
                        // A missing neighbour closer to the centre than the inner radius.
                        DIRECTIONS.iter().enumerate().any(|(d, &(ox, oy))| {
                            if neighbors[i][d] != NONE {
                                return false;
                            }
                            let jx = ix as i64 + ox;
                            let jy = iy as i64 + oy;
                            if jx < 0 || jy < 0 || jx as usize >= nx || jy as usize >= ny {
                                return false;
                            }
                            let p = lattice_coord(jx as usize, jy as usize);
                            p[0].hypot(p[1]) < inner
                        })
                    }
                    (BoundaryFace::OuterCircle, DomainShape::Annulus { outer, .. }) => {
                        DIRECTIONS.iter().enumerate().any(|(d, &(ox, oy))| {
                            if neighbors[i][d] != NONE {
                                return false;
                            }
                            let jx = ix as i64 + ox;
                            let jy = iy as i64 + oy;
                            if jx < 0 || jy < 0 || jx as usize >= nx || jy as usize >= ny {
                                return true;
                            }
                            let p = lattice_coord(jx as usize, jy as usize);
                            p[0].hypot(p[1]) > outer
                        })
                    }
                    (face, shape) => {
                        return Err(DomainError::InvalidExtent(format!(
                            "boundary face {face:?} does not exist on {shape:?}"
                        )))
                    }
                };
                if hit {
                    is_gamma[i] = true;
                }
            }
        }

        let mut tags = Vec::with_capacity(n);
        let mut gamma = Vec::new();
        let mut gamma_slot = vec![NONE; n];
        for i in 0..n {
            if is_gamma[i] {
                gamma_slot[i] = gamma.len() as u32;
                gamma.push(i);
                tags.push(NodeTag::Gamma);
            } else if boundary[i] {
                tags.push(NodeTag::Neumann);
            } else {
                tags.push(NodeTag::Interior);
            }
        }
        if gamma.is_empty() {
            return Err(DomainError::EmptyGamma);
        }

        let grid = Grid {
            shape: spec.shape,
            dim,
            spacing: dx,
            nx,
            ny,
            origin,
            lattice_to_active,
            active,
            coords,
            neighbors,
            tags,
            gamma,
            gamma_slot,
            volume_units,
        };
        let components = grid.count_components(|_| true);
        if components != 1 {
            return Err(DomainError::Disconnected { components });
        }
        Ok(grid)
    }

    pub fn shape(&self) -> DomainShape {
        self.shape
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Number of active nodes.
    pub fn len(&self) -> usize {
        self.active.len()
    }

    pub fn is_empty(&self) -> bool {
        self.active.is_empty()
    }

    /// Lattice dimensions `(nx, ny)`; `ny == 1` in one dimension.
    pub fn lattice_dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn origin(&self) -> [f64; 2] {
        self.origin
    }

    /// Lattice position `(ix, iy)` of an active node.
    pub fn lattice_pos(&self, node: usize) -> (usize, usize) {
        let lat = self.active[node];
        (lat % self.nx, lat / self.nx)
    }

    /// Active node at a lattice position, if any.
    pub fn node_at(&self, ix: usize, iy: usize) -> Option<usize> {
        if ix >= self.nx || iy >= self.ny {
            return None;
        }
        match self.lattice_to_active[iy * self.nx + ix] {
            NONE => None,
            v => Some(v as usize),
        }
    }

    pub fn coord(&self, node: usize) -> [f64; 2] {
        self.coords[node]
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn tag(&self, node: usize) -> NodeTag {
        self.tags[node]
    }

    pub fn is_gamma(&self, node: usize) -> bool {
        self.gamma_slot[node] != NONE
    }

    /// Active indices of the Dirichlet boundary nodes, in boundary-slot order.
    pub fn gamma_nodes(&self) -> &[usize] {
        &self.gamma
    }

    pub fn gamma_count(&self) -> usize {
        self.gamma.len()
    }

    /// Slot of a node in the boundary-data vectors.
    pub fn gamma_slot(&self, node: usize) -> Option<usize> {
        match self.gamma_slot[node] {
            NONE => None,
            v => Some(v as usize),
        }
    }

    /// Neighbour in direction `d` (see [`DIRECTIONS`]).
    pub fn neighbor(&self, node: usize, d: usize) -> Option<usize> {
        match self.neighbors[node][d] {
            NONE => None,
            v => Some(v as usize),
        }
    }

    pub fn neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.neighbors[node].iter().filter(|&&q| q != NONE).map(|&q| q as usize)
    }

    pub fn degree(&self, node: usize) -> usize {
        self.neighbors(node).count()
    }

    /// Lumped (dual-cell) volume weight of a node in units of `dx^d / 2^d`.
    pub fn volume_units(&self, node: usize) -> u8 {
        self.volume_units[node]
    }

    /// Volume represented by one volume unit.
    pub fn unit_volume(&self) -> f64 {
        self.spacing.powi(self.dim as i32) / f64::from(1u32 << self.dim)
    }

    pub fn volume(&self, node: usize) -> f64 {
        f64::from(self.volume_units[node]) * self.unit_volume()
    }

    /// Total measure of the discrete domain.
    pub fn measure(&self) -> f64 {
        self.volume_units.iter().map(|&u| u64::from(u)).sum::<u64>() as f64 * self.unit_volume()
    }

    /// Coefficient turning `(v_p - v_q)^2` summed over edges into `integral |grad v|^2`.
    pub fn edge_weight(&self) -> f64 {
        self.spacing.powi(self.dim as i32 - 2)
    }

    /// Number of connected components of the active nodes selected by `keep`.
    pub fn count_components(&self, keep: impl Fn(usize) -> bool) -> usize {
        let n = self.len();
        let mut seen = vec![false; n];
        let mut count = 0;
        let mut queue = VecDeque::new();
        for start in 0..n {
            if seen[start] || !keep(start) {
                continue;
            }
            count += 1;
            seen[start] = true;
            queue.push_back(start);
            while let Some(p) = queue.pop_front() {
                for q in self.neighbors(p) {
                    if !seen[q] && keep(q) {
                        seen[q] = true;
                        queue.push_back(q);
                    }
                }
            }
        }
        count
    }

    /// Squared lattice distance (in units of `dx^2`) from every node to the
    /// nearest node selected by `source`. `u64::MAX` when no source exists.
    pub fn lattice_distance_sq(&self, source: impl Fn(usize) -> bool) -> Vec<u64> {
        let sources: Vec<(i64, i64)> = (0..self.len())
            .filter(|&i| source(i))
            .map(|i| {
                let (x, y) = self.lattice_pos(i);
                (x as i64, y as i64)
            })
            .collect();
        (0..self.len())
            .map(|i| {
                let (x, y) = self.lattice_pos(i);
                sources
                    .iter()
                    .map(|&(sx, sy)| {
                        let (dx, dy) = (x as i64 - sx, y as i64 - sy);
                        (dx * dx + dy * dy) as u64
                    })
                    .min()
                    .unwrap_or(u64::MAX)
            })
            .collect()
    }

    /// Distance of every node to the nearest boundary node.
    pub fn distance_to_gamma(&self) -> Vec<f64> {
        self.lattice_distance_sq(|i| self.is_gamma(i))
            .into_iter()
            .map(|d| (d as f64).sqrt() * self.spacing)
            .collect()
    }

    /// A length expressed in lattice units, snapped to the nearest integer
    /// when it is one up to rounding.
    pub(crate) fn lattice_units(&self, length: f64) -> f64 {
        let r = length / self.spacing;
        if (r - r.round()).abs() < 1e-9 * r.abs().max(1.0) {
            r.round()
        } else {
            r
        }
    }
}
