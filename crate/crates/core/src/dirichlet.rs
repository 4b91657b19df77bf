//! Constrained Dirichlet minimiser: the least-energy field equal to the
//! boundary datum on the Dirichlet nodes and zero outside a given set.

use std::collections::VecDeque;
use std::sync::Arc;

use crate::domain::{Grid, RegionMask};
use crate::error::{DomainError, SolveError};
use crate::field::ScalarField;
use crate::linalg::{graph_laplacian_at, MaskedLaplacian};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone)]
pub struct DirichletSolution {
    pub field: ScalarField,
    /// `1/2 integral |grad h|^2`.
    pub energy: f64,
    /// Largest discrete Laplacian over the free nodes of the set.
    pub residual_el: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, Default)]
pub struct DirichletOptions<'a> {
    pub tolerances: Tolerances,
    /// Initial guess for the iterative solver.
    pub initial: Option<&'a ScalarField>,
}

/// Solve with default tolerances and a zero initial guess.
pub fn solve_dirichlet(grid: &Arc<Grid>, a: &RegionMask, eta: &[f64]) -> Result<DirichletSolution, SolveError> {
    solve_dirichlet_with(grid, a, eta, &DirichletOptions::default())
}

/// Checks that the admissible class is non-empty: every boundary node with a
/// datum above the positivity threshold must lie in `a` or next to it.
pub fn check_admissible(grid: &Grid, a: &RegionMask, eta: &[f64], tol: &Tolerances) -> Result<(), SolveError> {
    if eta.len() != grid.gamma_count() {
        return Err(DomainError::LengthMismatch { expected: grid.gamma_count(), got: eta.len() }.into());
    }
    if let Some(slot) = eta.iter().position(|v| !v.is_finite()) {
        return Err(DomainError::NonFinite { node: grid.gamma_nodes()[slot] }.into());
    }
    let max = eta.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let dpos = tol.delta_pos(max);
    for (slot, &g) in grid.gamma_nodes().iter().enumerate() {
        if eta[slot].abs() > dpos && !a.contains(g) && !grid.neighbors(g).any(|q| a.contains(q)) {
            return Err(SolveError::EmptyAdmissibleClass { node: g, value: eta[slot] });
        }
    }
    Ok(())
}

/// Nodes of `a` connected, through `a`, to a boundary node with non-zero
/// datum. The minimiser vanishes on every other component.
pub(crate) fn driven_part(grid: &Grid, a: &RegionMask, eta: &[f64]) -> Vec<bool> {
    let mut seen = vec![false; grid.len()];
    let mut queue = VecDeque::new();
    for (slot, &g) in grid.gamma_nodes().iter().enumerate() {
        if eta[slot] != 0.0 {
            seen[g] = true;
            queue.push_back(g);
        }
    }
    while let Some(p) = queue.pop_front() {
        for q in grid.neighbors(p) {
            if !seen[q] && a.contains(q) && !grid.is_gamma(q) {
                seen[q] = true;
                queue.push_back(q);
            }
        }
    }
    seen
}

pub fn solve_dirichlet_with(
    grid: &Arc<Grid>,
    a: &RegionMask,
    eta: &[f64],
    opts: &DirichletOptions<'_>,
) -> Result<DirichletSolution, SolveError> {
    if a.bits().len() != grid.len() {
        return Err(DomainError::GridMismatch.into());
    }
    let tol = &opts.tolerances;
    check_admissible(grid, a, eta, tol)?;
    // Whole domain free with a uniform datum: the constant is the minimiser.
    if a.count() == grid.len() && eta.windows(2).all(|p| p[0] == p[1]) {
        let c = eta.first().copied().unwrap_or(0.0);
        let field = ScalarField::constant(grid, c);
        return Ok(DirichletSolution { field, energy: 0.0, residual_el: 0.0, iterations: 0 });
    }
    let driven = driven_part(grid, a, eta);
    let mut values = match opts.initial {
        Some(f) if f.values().len() == grid.len() => f.values().to_vec(),
        _ => vec![0.0; grid.len()],
    };
    for i in 0..grid.len() {
        if !driven[i] || !a.contains(i) {
            values[i] = 0.0;
        }
    }
    for (slot, &g) in grid.gamma_nodes().iter().enumerate() {
        values[g] = eta[slot];
    }
    let op = MaskedLaplacian::new(grid, |i| driven[i] && a.contains(i) && !grid.is_gamma(i));
    let out = op.solve(&mut values, None, tol.cg_relative);
    if !out.converged {
        return Err(SolveError::SolverDivergence { iterations: out.iterations, residual: out.residual });
    }
    // Discrete maximum principle; removes round-off overshoot only.
    let hi = eta.iter().copied().fold(0.0f64, f64::max);
    let lo = eta.iter().copied().fold(0.0f64, f64::min);
    for &p in op.free_nodes() {
        values[p] = values[p].clamp(lo, hi);
    }
    let field = ScalarField::new(grid, values)?;
    let energy = field.dirichlet_energy();
    let residual_el = el_residual(&field, a);
    Ok(DirichletSolution { field, energy, residual_el, iterations: out.iterations })
}

/// Discrete Laplacian `sum_q (v_q - v_p) / dx^2` at a node, using only the
/// active neighbours (natural boundary condition on Neumann nodes).
pub fn discrete_laplacian(field: &ScalarField, node: usize) -> f64 {
    let grid = field.grid();
    -graph_laplacian_at(grid, field.values(), node) / (grid.spacing() * grid.spacing())
}

/// Largest `|discrete Laplacian|` over the free nodes of `a` (nodes of `a`
/// that are not Dirichlet nodes).
pub fn el_residual(field: &ScalarField, a: &RegionMask) -> f64 {
    let grid = field.grid();
    a.iter()
        .filter(|&p| !grid.is_gamma(p))
        .map(|p| discrete_laplacian(field, p).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{BoundaryFace, DomainShape, GridSpec};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn interval(length: f64, dx: f64) -> Arc<Grid> {
        Arc::new(
            Grid::build(&GridSpec {
                shape: DomainShape::Interval { length },
                spacing: dx,
                gamma: vec![BoundaryFace::Left],
            })
            .unwrap(),
        )
    }

    fn annulus(dx: f64) -> Arc<Grid> {
        Arc::new(
            Grid::build(&GridSpec {
                shape: DomainShape::Annulus { inner: 0.2, outer: 1.0 },
                spacing: dx,
                gamma: vec![BoundaryFace::InnerCircle],
            })
            .unwrap(),
        )
    }

    #[test]
    fn constant_on_full_domain() {
        let g = annulus(0.05);
        let eta = vec![0.7; g.gamma_count()];
        let s = solve_dirichlet(&g, &RegionMask::full(&g), &eta).unwrap();
        assert!(s.field.values().iter().all(|&v| (v - 0.7).abs() < 1e-9));
        assert!(s.energy < 1e-16);
    }

    #[test]
    fn one_dimensional_tent() {
        let g = interval(1.0, 0.01);
        let a = RegionMask::from_coords(&g, |x, _| x < 0.5 - 1e-9);
        let s = solve_dirichlet(&g, &a, &[1.0]).unwrap();
        for (i, &v) in s.field.values().iter().enumerate() {
            let x = g.coord(i)[0];
            assert!((v - (1.0 - 2.0 * x).max(0.0)).abs() < 1e-9, "x = {x}: {v}");
        }
        assert!((s.energy - 1.0).abs() < 1e-9);
        assert!(s.residual_el <= Tolerances::default().el(1.0, 0.01));
    }

    #[test]
    fn radial_band_energy_converges() {
        // h = log(l / r) / log(l / r0) on the band, energy pi / log(l / r0).
        let exact = std::f64::consts::PI / (0.5f64 / 0.2).ln();
        let mut errs = Vec::new();
        for dx in [0.02, 0.01, 0.005] {
            let g = annulus(dx);
            let a = RegionMask::from_coords(&g, |x, y| x.hypot(y) < 0.5);
            let s = solve_dirichlet(&g, &a, &vec![1.0; g.gamma_count()]).unwrap();
            errs.push((s.energy - exact).abs() / exact);
        }
        assert!(errs[2] < 0.05, "{errs:?}");
        assert!(errs[2] < errs[0], "{errs:?}");
    }

    #[test]
    fn energy_of_hand_summed_field() {
        let g = interval(0.4, 0.1);
        let v = vec![0.3, -1.2, 0.5, 2.0, 0.1];
        let f = ScalarField::new(&g, v.clone()).unwrap();
        let mut hand = 0.0;
        for i in 0..4 {
            let d = (v[i + 1] - v[i]) / 0.1;
            hand += 0.5 * d * d * 0.1;
        }
        assert!((f.dirichlet_energy() - hand).abs() < 1e-12);
        let g = interval(1.0, 0.01);
        let lin = ScalarField::from_fn(&g, |x, _| 2.0 * (1.0 - x / 0.5).max(0.0));
        assert!((lin.dirichlet_energy() - 4.0).abs() < 1e-9);
        assert_eq!(ScalarField::constant(&g, 3.0).dirichlet_energy(), 0.0);
    }

    #[test]
    fn laplacian_of_parabola() {
        let g = interval(1.0, 0.01);
        let f = ScalarField::from_fn(&g, |x, _| x * x);
        for i in 1..100 {
            assert!((discrete_laplacian(&f, i) - 2.0).abs() < 1e-6);
        }
        assert!(el_residual(&f, &RegionMask::full(&g)) >= 2.0 - 1e-6);
        assert_eq!(el_residual(&ScalarField::zeros(&g), &RegionMask::full(&g)), 0.0);
    }

    #[test]
    fn empty_admissible_class() {
        let g = interval(1.0, 0.1);
        let a = RegionMask::from_coords(&g, |x, _| x > 0.5);
        let e = solve_dirichlet(&g, &a, &[1.0]).unwrap_err();
        assert_eq!(e, SolveError::EmptyAdmissibleClass { node: 0, value: 1.0 });
        // zero datum is always admissible
        let s = solve_dirichlet(&g, &a, &[0.0]).unwrap();
        assert!(s.field.values().iter().all(|&v| v == 0.0));
        // adjacent to the set is enough
        let a = RegionMask::from_coords(&g, |x, _| x > 0.05 && x < 0.35);
        assert!(solve_dirichlet(&g, &a, &[1.0]).is_ok());
    }

    #[test]
    fn detached_component_vanishes() {
        let g = interval(1.0, 0.05);
        let a = RegionMask::from_coords(&g, |x, _| x < 0.3 || (x > 0.5 && x < 0.8));
        let s = solve_dirichlet(&g, &a, &[1.0]).unwrap();
        for i in 0..g.len() {
            if g.coord(i)[0] > 0.45 {
                assert_eq!(s.field.values()[i], 0.0);
            }
        }
    }

    fn random_setup(seed: u64) -> (Arc<Grid>, RegionMask, Vec<f64>) {
        let g = Arc::new(
            Grid::build(&GridSpec {
                shape: DomainShape::Rectangle { width: 1.0, height: 0.6 },
                spacing: 0.05,
                gamma: vec![BoundaryFace::Left, BoundaryFace::Bottom],
            })
            .unwrap(),
        );
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bits = (0..g.len()).map(|_| rng.gen_bool(0.7)).collect();
        let a = RegionMask::from_bits(&g, bits).unwrap();
        // keep only data on boundary nodes the set reaches
        let eta = g
            .gamma_nodes()
            .iter()
            .map(|&n| {
                let ok = a.contains(n) || g.neighbors(n).any(|q| a.contains(q));
                if ok { 2.0 * ((n * 7919 + seed as usize) % 13) as f64 / 13.0 } else { 0.0 }
            })
            .collect();
        (g, a, eta)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn dirichlet_properties(seed in 0u64..10_000) {
            let (g, a, eta) = random_setup(seed);
            let tol = Tolerances::default();
            let s = solve_dirichlet(&g, &a, &eta).unwrap();
            let max_eta = eta.iter().copied().fold(0.0, f64::max);
            // maximum principle
            prop_assert!(s.field.min() >= -1e-12);
            prop_assert!(s.field.max() <= max_eta + 1e-12);
            // zero outside a except on the boundary nodes
            for i in 0..g.len() {
                if !a.contains(i) && !g.is_gamma(i) {
                    prop_assert_eq!(s.field.values()[i], 0.0);
                }
            }
            prop_assert!(s.residual_el <= tol.el(max_eta, g.spacing()));
            // uniqueness: a different initial guess gives the same field
            let guess = ScalarField::constant(&g, 5.0);
            let t = solve_dirichlet_with(&g, &a, &eta, &DirichletOptions { tolerances: tol, initial: Some(&guess) }).unwrap();
            prop_assert!(s.field.max_abs_diff(&t.field) <= 10.0 * tol.field(max_eta));
            // optimality against admissible perturbations
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabcdef);
            for _ in 0..20 {
                let mut v = s.field.values().to_vec();
                for i in 0..g.len() {
                    if a.contains(i) && !g.is_gamma(i) {
                        v[i] += rng.gen_range(-0.1..0.1);
                    }
                }
                let e = ScalarField::new(&g, v).unwrap().dirichlet_energy();
                prop_assert!(e >= s.energy - 1e-9);
            }
        }
    }
}
