//! Masked graph Laplacian and preconditioned conjugate gradients.

use crate::domain::Grid;

const FIXED: u32 = u32::MAX;

/// Graph Laplacian restricted to a set of free nodes; every other node is a
/// Dirichlet value supplied at solve time.
#[derive(Debug, Clone)]
pub(crate) struct MaskedLaplacian {
    free: Vec<usize>,
    local: Vec<u32>,
    /// Neighbours as `(local index or FIXED, global index)`.
    adj: Vec<[(u32, u32); 4]>,
    degree: Vec<u8>,
    diag: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct CgOutcome {
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

impl MaskedLaplacian {
    pub fn new(grid: &Grid, is_free: impl Fn(usize) -> bool) -> Self {
        let n = grid.len();
        let mut local = vec![FIXED; n];
        let mut free = Vec::new();
        for i in 0..n {
            if is_free(i) {
                local[i] = free.len() as u32;
                free.push(i);
            }
        }
        let mut adj = Vec::with_capacity(free.len());
        let mut degree = Vec::with_capacity(free.len());
        let mut diag = Vec::with_capacity(free.len());
        for &p in &free {
            let mut row = [(FIXED, FIXED); 4];
            let mut k = 0;
            for q in grid.neighbors(p) {
                row[k] = (local[q], q as u32);
                k += 1;
            }
            adj.push(row);
            degree.push(k as u8);
            diag.push(k as f64);
        }
        MaskedLaplacian { free, local, adj, degree, diag }
    }

    pub fn free_nodes(&self) -> &[usize] {
        &self.free
    }

    pub fn len(&self) -> usize {
        self.free.len()
    }

    fn row(&self, i: usize) -> &[(u32, u32)] {
        &self.adj[i][..self.degree[i] as usize]
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.len() {
            let mut acc = self.diag[i] * x[i];
            for &(l, _) in self.row(i) {
                if l != FIXED {
                    acc -= x[l as usize];
                }
            }
            y[i] = acc;
        }
    }

    /// Symmetric Gauss-Seidel sweep `z = M^{-1} r`.
    fn precondition(&self, r: &[f64], z: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut acc = r[i];
            for &(l, _) in self.row(i) {
                if l != FIXED && (l as usize) < i {
                    acc += z[l as usize];
                }
            }
            z[i] = acc / self.diag[i];
        }
        for i in (0..n).rev() {
            let mut acc = 0.0;
            for &(l, _) in self.row(i) {
                if l != FIXED && (l as usize) > i {
                    acc += z[l as usize];
                }
            }
            z[i] += acc / self.diag[i];
        }
    }

    /// Solve `L v = -force` on the free nodes with `values` supplying the
    /// fixed nodes and the initial guess. `force` is indexed by global node
    /// and already divided by the edge weight. Updates `values` in place.
    pub fn solve(&self, values: &mut [f64], force: Option<&[f64]>, rel_tol: f64) -> CgOutcome {
        let n = self.len();
        if n == 0 {
            return CgOutcome { iterations: 0, residual: 0.0, converged: true };
        }
        let mut b = vec![0.0; n];
        for (i, &p) in self.free.iter().enumerate() {
            let mut acc = force.map_or(0.0, |f| -f[p]);
            for &(l, g) in self.row(i) {
                if l == FIXED {
                    acc += values[g as usize];
                }
            }
            b[i] = acc;
        }
        let bnorm = norm(&b);
        let mut x: Vec<f64> = self.free.iter().map(|&p| values[p]).collect();
        if bnorm == 0.0 {
            for &p in &self.free {
                values[p] = 0.0;
            }
            return CgOutcome { iterations: 0, residual: 0.0, converged: true };
        }
        let cap = ((50.0 * (n as f64).sqrt()).ceil() as usize).max(50);
        let mut r = vec![0.0; n];
        self.apply(&x, &mut r);
        for i in 0..n {
            r[i] = b[i] - r[i];
        }
        let mut z = vec![0.0; n];
        let mut q = vec![0.0; n];
        let mut rel = norm(&r) / bnorm;
        let mut iterations = 0;
        if rel > rel_tol {
            self.precondition(&r, &mut z);
            let mut p = z.clone();
            let mut rz = dot(&r, &z);
            while iterations < cap {
                iterations += 1;
                self.apply(&p, &mut q);
                let pq = dot(&p, &q);
                if !(pq > 0.0) {
                    break;
                }
                let alpha = rz / pq;
                for i in 0..n {
                    x[i] += alpha * p[i];
                    r[i] -= alpha * q[i];
                }
                rel = norm(&r) / bnorm;
                if rel <= rel_tol {
                    break;
                }
                self.precondition(&r, &mut z);
                let rz_new = dot(&r, &z);
                let beta = rz_new / rz;
                rz = rz_new;
                for i in 0..n {
                    p[i] = z[i] + beta * p[i];
                }
            }
        }
        for (i, &p) in self.free.iter().enumerate() {
            values[p] = x[i];
        }
        CgOutcome { iterations, residual: rel, converged: rel <= rel_tol }
    }

    #[allow(dead_code)]
    pub fn local_index(&self, node: usize) -> Option<usize> {
        match self.local[node] {
            FIXED => None,
            l => Some(l as usize),
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `sum_q (v_p - v_q)` over the active neighbours of `p`.
pub(crate) fn graph_laplacian_at(grid: &Grid, values: &[f64], p: usize) -> f64 {
    grid.neighbors(p).map(|q| values[p] - values[q]).sum()
}
