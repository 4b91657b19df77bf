//! One Alt-Caffarelli minimisation on a strip, checked against exhaustive
//! search on a tiny grid.

use std::sync::Arc;

use debond::bernoulli::{ac_value, minimize_ac};
use debond::dirichlet::solve_dirichlet;
use debond::domain::{BoundaryFace, DomainShape, Grid, GridSpec, RegionMask, ToughnessField};

fn strip(width: f64, height: f64, dx: f64) -> Arc<Grid> {
    let spec = GridSpec { shape: DomainShape::Rectangle { width, height }, spacing: dx, gamma: vec![BoundaryFace::Left] };
    Arc::new(Grid::build(&spec).unwrap())
}

fn main() {
    // A uniformly pulled strip: the optimal front sits at w / sqrt(2 kappa).
    let g = strip(1.0, 0.2, 0.01);
    let a = RegionMask::empty(&g);
    let kappa = ToughnessField::constant(&g, 0.5, &a).unwrap();
    let w = vec![0.3; g.gamma_count()];
    let r = minimize_ac(&g, &a, &kappa, &w).unwrap();
    let rows = g.lattice_dims().1 as f64;
    println!(
        "strip: AC {:.6}, front {:.3} (expected {:.3}), origin {:?}, {} solves",
        r.ac_value,
        r.positivity.count() as f64 / rows * g.spacing(),
        0.3 / 1.0f64.sqrt(),
        r.origin,
        r.linear_solves
    );

    // Tiny grid with patchy toughness: compare with every admissible set.
    let g = strip(0.3, 0.2, 0.1);
    let a = RegionMask::from_fn(&g, |p| g.lattice_pos(p).0 == 0);
    let kappa = ToughnessField::from_fn(&g, |x, y| if (x * 10.0).round() as i32 % 2 == 0 { 0.2 } else { 1.5 + y }, &a).unwrap();
    let w = vec![0.4; g.gamma_count()];
    let r = minimize_ac(&g, &a, &kappa, &w).unwrap();
    let free: Vec<usize> = (0..g.len()).filter(|&p| !a.contains(p)).collect();
    let mut best = f64::INFINITY;
    for bits in 0u32..1 << free.len() {
        let mut set = a.clone();
        for (k, &p) in free.iter().enumerate() {
            set.set(p, bits >> k & 1 == 1);
        }
        if let Ok(s) = solve_dirichlet(&g, &set, &w) {
            best = best.min(ac_value(&s.field, &a, &kappa));
        }
    }
    println!("patchy: heuristic {:.10}, exhaustive {:.10} over {} sets", r.ac_value, best, 1u32 << free.len());
}
