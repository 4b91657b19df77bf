//! Default tolerances, all overridable from a run configuration.

use serde::{Deserialize, Serialize};

/// Numerical tolerances shared by the solvers and the audit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Relative residual of the conjugate gradient solves.
    pub cg_relative: f64,
    /// Positivity threshold relative to `max(1, max boundary datum)`.
    pub positivity_relative: f64,
    /// Stability margin tolerance relative to `1 + ac_value`.
    pub stability_relative: f64,
    /// Euler-Lagrange residual tolerance, relative to `max(1, datum) / dx^2`.
    pub el_relative: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { cg_relative: 1e-10, positivity_relative: 1e-8, stability_relative: 1e-6, el_relative: 1e-6 }
    }
}

impl Tolerances {
    /// Threshold separating genuine positivity from solver noise.
    pub fn delta_pos(&self, max_datum: f64) -> f64 {
        self.positivity_relative * max_datum.abs().max(1.0)
    }

    pub fn stability(&self, ac_value: f64) -> f64 {
        self.stability_relative * (1.0 + ac_value.abs())
    }

    /// Largest acceptable discrete Laplacian at a free node.
    pub fn el(&self, max_datum: f64, spacing: f64) -> f64 {
        self.el_relative * max_datum.abs().max(1.0) / (spacing * spacing)
    }

    /// Agreement required between two solves of the same linear problem,
    /// in the sup norm.
    pub fn field(&self, max_datum: f64) -> f64 {
        1e3 * self.cg_relative.max(1e-13) * max_datum.abs().max(1.0)
    }
}
