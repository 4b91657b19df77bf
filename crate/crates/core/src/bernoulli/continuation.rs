//! Smoothed-penalty continuation for the Alt-Caffarelli functional.
//!
//! The jump `chi_{v > 0}` is replaced by `min(v / eps, 1)` on `v >= 0`. For a
//! fixed `eps` every node is either clamped at zero, in the transition layer
//! (constant downward force `kappa / eps`), or above the layer (no force).
//! A primal-dual active set iteration updates that classification; each
//! classification is one linear solve.

use crate::domain::Grid;
use crate::linalg::MaskedLaplacian;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Class {
    Zero,
    Layer,
    Free,
}

pub(crate) struct Problem<'a> {
    pub grid: &'a Grid,
    /// Node may move (inside the window and not a Dirichlet node).
    pub eligible: &'a [bool],
    /// `kappa * volume` outside the constraint set, zero inside it.
    pub cost: &'a [f64],
    pub cg_tol: f64,
    pub max_active_set_iterations: usize,
}

impl Problem<'_> {
    /// Smoothed objective.
    pub fn objective(&self, v: &[f64], eps: f64) -> f64 {
        let w = self.grid.edge_weight();
        let mut grad = 0.0;
        let mut pen = 0.0;
        for p in 0..self.grid.len() {
            for d in [1usize, 3] {
                if let Some(q) = self.grid.neighbor(p, d) {
                    let e = v[q] - v[p];
                    grad += e * e;
                }
            }
            if self.cost[p] > 0.0 && v[p] > 0.0 {
                pen += self.cost[p] * (v[p] / eps).min(1.0);
            }
        }
        0.5 * w * grad + pen
    }

    fn classify(&self, v: &[f64], eps: f64, p: usize) -> Class {
        if self.cost[p] == 0.0 {
            Class::Free
        } else if v[p] <= 0.0 {
            Class::Zero
        } else if v[p] < eps {
            Class::Layer
        } else {
            Class::Free
        }
    }

    /// Relax `v` at one smoothing level. Returns the best objective found
    /// and the number of linear solves.
    pub fn relax(&self, v: &mut Vec<f64>, eps: f64) -> (f64, usize) {
        let n = self.grid.len();
        let scale = 1.0 / (eps * self.grid.edge_weight());
        let mut class: Vec<Class> = (0..n).map(|p| self.classify(v, eps, p)).collect();
        let mut force = vec![0.0; n];
        let mut best = (f64::INFINITY, v.clone());
        let mut solves = 0;
        for _ in 0..self.max_active_set_iterations {
            for p in 0..n {
                force[p] = if self.eligible[p] && class[p] == Class::Layer { self.cost[p] * scale } else { 0.0 };
                if self.eligible[p] && class[p] == Class::Zero {
                    v[p] = 0.0;
                }
            }
            let op = MaskedLaplacian::new(self.grid, |p| self.eligible[p] && class[p] != Class::Zero);
            op.solve(v, Some(&force), self.cg_tol);
            solves += 1;
            let j = self.objective(v, eps);
            if j < best.0 {
                best = (j, v.clone());
            }
            let mut changed = false;
            for p in 0..n {
                if !self.eligible[p] {
                    continue;
                }
                let next = if class[p] == Class::Zero {
                    let pull: f64 = self.grid.neighbors(p).map(|q| v[q]).sum();
                    if pull > self.cost[p] * scale { Class::Layer } else { Class::Zero }
                } else {
                    self.classify(v, eps, p)
                };
                if next != class[p] {
                    class[p] = next;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        *v = best.1;
        for x in v.iter_mut() {
            *x = x.max(0.0);
        }
        (best.0, solves)
    }
}
