use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::dirichlet::{el_residual, solve_dirichlet};
use crate::domain::{BoundaryFace, DomainShape, GridSpec};

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

fn prefix(g: &Arc<Grid>, l: f64) -> RegionMask {
    RegionMask::from_coords(g, |x, _| x < l - 1e-9)
}

/// Number of grid nodes of the positivity set, times `dx`.
fn front(r: &ACResult) -> f64 {
    r.positivity.count() as f64 * r.field.grid().spacing()
}

#[test]
fn ac_value_examples() {
    let g = interval(1.0, 0.01);
    let k = ToughnessField::constant(&g, 1.0, &RegionMask::empty(&g)).unwrap();
    assert_eq!(ac_value(&ScalarField::zeros(&g), &prefix(&g, 0.3), &k), 0.0);
    let tent = ScalarField::from_fn(&g, |x, _| (1.0 - 2.0 * x).max(0.0));
    assert!((ac_value(&tent, &prefix(&g, 0.5), &k) - 1.0).abs() < 1e-9);
    assert!((ac_value(&tent, &prefix(&g, 0.25), &k) - 1.25).abs() < 1e-9);
}

#[test]
fn huge_toughness_reproduces_dirichlet() {
    let g = Arc::new(
        Grid::build(&GridSpec {
            shape: DomainShape::Rectangle { width: 1.0, height: 0.5 },
            spacing: 0.05,
            gamma: vec![BoundaryFace::Left],
        })
        .unwrap(),
    );
    let a = RegionMask::from_coords(&g, |x, y| x < 0.3 || (y > 0.2 && y < 0.3 && x < 0.6));
    let w = vec![1.0; g.gamma_count()];
    let big = 10.0 / (2.0 * 0.05 * 0.05);
    let k = ToughnessField::constant(&g, big, &a).unwrap();
    let r = minimize_ac(&g, &a, &k, &w).unwrap();
    let h = solve_dirichlet(&g, &a, &w).unwrap();
    assert!(r.field.max_abs_diff(&h.field) < 1e-8);
    assert!(r.positivity.is_subset(&a).unwrap());
}

#[test]
fn stays_put_below_threshold() {
    let g = interval(1.0, 0.0025);
    let a = prefix(&g, 0.1);
    let k = ToughnessField::constant(&g, 0.5, &a).unwrap();
    for c in [0.02, 0.06, 0.095] {
        let r = minimize_ac(&g, &a, &k, &[c]).unwrap();
        assert!((front(&r) - 0.1).abs() < 1e-12, "c = {c}: front {}", front(&r));
        let exact = ScalarField::from_fn(&g, |x, _| c * (1.0 - x / 0.1).max(0.0));
        assert!(r.field.max_abs_diff(&exact) < 1e-9);
    }
}

#[test]
fn moving_front_position() {
    let g = interval(1.0, 0.0025);
    let a = prefix(&g, 0.1);
    let k = ToughnessField::constant(&g, 0.5, &a).unwrap();
    let r = minimize_ac(&g, &a, &k, &[0.3]).unwrap();
    assert!((front(&r) - 0.3).abs() <= 0.0025 + 1e-12, "front {}", front(&r));
    assert!(r.converged);
}

#[test]
fn result_invariants() {
    let g = interval(1.0, 0.01);
    let a = prefix(&g, 0.2);
    let k = ToughnessField::from_fn(&g, |x, _| 0.3 + x, &a).unwrap();
    let w = [0.4];
    let r = minimize_ac(&g, &a, &k, &w).unwrap();
    let tol = Tolerances::default();
    assert!(r.field.min() >= 0.0);
    assert!(r.field.max() <= 0.4 + 1e-12);
    let set = r.positivity.union(&a).unwrap();
    assert!(el_residual(&r.field, &set) <= tol.el(0.4, 0.01));
    // the driven part of the constraint set stays positive
    assert!(a.is_subset(&r.positivity).unwrap());
    // never worse than the built-in competitors
    let h_a = solve_dirichlet(&g, &a, &w).unwrap();
    let h_full = solve_dirichlet(&g, &RegionMask::full(&g), &w).unwrap();
    assert!(r.ac_value <= ac_value(&h_a.field, &a, &k) + 1e-12);
    assert!(r.ac_value <= ac_value(&h_full.field, &a, &k) + 1e-12);
    // incumbent trace never increases
    assert!(r.continuation_trace.windows(2).all(|p| p[1].1 <= p[0].1));
    assert_eq!(r.continuation_trace.len(), 12);
}

/// Closed-form oracle on an interval: for the prefix set of `k` nodes the
/// Dirichlet minimiser is linear with energy `w^2 / (2 k dx)`; the full set
/// carries the constant `w`.
fn scan_fronts(n_nodes: usize, dx: f64, k0: usize, kappa: &[f64], w: f64) -> f64 {
    let vol = |i: usize| if i == 0 || i == n_nodes - 1 { dx / 2.0 } else { dx };
    let mut best = f64::INFINITY;
    for k in k0.max(1)..=n_nodes {
        let energy = if k == n_nodes { 0.0 } else { w * w / (2.0 * k as f64 * dx) };
        let cost: f64 = (k0..k).map(|i| kappa[i] * vol(i)).sum();
        best = best.min(energy + cost);
    }
    best
}

#[test]
fn brute_force_scan_32_nodes() {
    let g = interval(31.0 / 32.0, 1.0 / 32.0);
    assert_eq!(g.len(), 32);
    for (k0, w, kappa) in [(4usize, 0.2, 0.5), (4, 0.05, 0.5), (10, 0.6, 0.3), (20, 0.5, 0.5), (1, 0.1, 2.0)] {
        let a = RegionMask::from_fn(&g, |i| i < k0);
        let k = ToughnessField::constant(&g, kappa, &a).unwrap();
        let r = minimize_ac(&g, &a, &k, &[w]).unwrap();
        let oracle = scan_fronts(32, 1.0 / 32.0, k0, k.values(), w);
        assert!((r.ac_value - oracle).abs() < 1e-8, "k0 {k0}, w {w}: {} vs {oracle}", r.ac_value);
    }
}

/// Exhaustive search over every set containing the constraint set.
fn brute_force(g: &Arc<Grid>, a: &RegionMask, k: &ToughnessField, w: &[f64]) -> f64 {
    let free: Vec<usize> = (0..g.len()).filter(|&i| !a.contains(i)).collect();
    let mut best = f64::INFINITY;
    for bits in 0u32..(1 << free.len()) {
        let mut set = a.clone();
        for (j, &i) in free.iter().enumerate() {
            if bits & (1 << j) != 0 {
                set.set(i, true);
            }
        }
        if let Ok(s) = solve_dirichlet(g, &set, w) {
            best = best.min(ac_value(&s.field, a, k));
        }
    }
    best
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn matches_exhaustive_search_on_tiny_grid(
        kap in proptest::collection::vec(0.2f64..3.0, 12),
        w in 0.1f64..1.5,
        mask in 0u32..16,
    ) {
        let g = Arc::new(Grid::build(&GridSpec {
            shape: DomainShape::Rectangle { width: 0.3, height: 0.3 },
            spacing: 0.1,
            gamma: vec![BoundaryFace::Left],
        }).unwrap());
        // constraint set: boundary column plus some of the second column
        let a = RegionMask::from_fn(&g, |i| {
            let (ix, iy) = g.lattice_pos(i);
            ix == 0 || (ix == 1 && mask & (1 << iy) != 0)
        });
        let mut values = vec![1.0; g.len()];
        let mut j = 0;
        for (i, v) in values.iter_mut().enumerate() {
            if !a.contains(i) {
                *v = kap[j];
                j += 1;
            }
        }
        let k = ToughnessField::new(&g, values, &a).unwrap();
        let wv = vec![w; g.gamma_count()];
        let r = minimize_ac(&g, &a, &k, &wv).unwrap();
        let oracle = brute_force(&g, &a, &k, &wv);
        prop_assert!(r.ac_value >= oracle - 1e-9);
        prop_assert!(r.ac_value <= oracle + 1e-9, "heuristic {} vs exhaustive {}", r.ac_value, oracle);
    }

    // Patchy toughness makes the front landscape rugged, with local minima
    // that shell moves alone cannot leave.
    #[test]
    fn rugged_toughness_matches_front_scan(
        kap in proptest::collection::vec(0.05f64..2.0, 32),
        w in 0.05f64..1.0,
        k0 in 1usize..31,
    ) {
        let g = interval(31.0 / 32.0, 1.0 / 32.0);
        let a = RegionMask::from_fn(&g, |i| i < k0);
        let k = ToughnessField::new(&g, kap, &a).unwrap();
        let r = minimize_ac(&g, &a, &k, &[w]).unwrap();
        let oracle = scan_fronts(32, 1.0 / 32.0, k0, k.values(), w);
        prop_assert!((r.ac_value - oracle).abs() < 1e-8, "{} vs {}", r.ac_value, oracle);
    }
}

#[test]
fn stability_of_minimiser_and_detection() {
    let g = interval(1.0, 0.01);
    let a = prefix(&g, 0.3);
    let k = ToughnessField::constant(&g, 0.5, &a).unwrap();
    let fam = CompetitorFamily::default();
    let tol = Tolerances::default();
    // minimiser is stable against growth
    let r = minimize_ac(&g, &a, &k, &[0.25]).unwrap();
    let set = r.positivity.union(&a).unwrap();
    let rep = stability_check(&r.field, &set, &k, &[0.25], &fam, &tol);
    assert!(rep.passed, "{rep:?}");
    assert!(rep.min_growth_margin >= -rep.tolerance);
    // front at 0.3 under w = 0.45 > sqrt(2 kappa l min(l, L - l)) = 0.3 is unstable
    let h = solve_dirichlet(&g, &a, &[0.45]).unwrap();
    let rep = stability_check(&h.field, &a, &k, &[0.45], &fam, &tol);
    assert!(!rep.passed);
    assert!(rep.min_growth_margin < 0.0);
    assert!(rep.competitors.iter().any(|c| c.kind == CompetitorKind::Retraction && c.pass.is_none()));
}
