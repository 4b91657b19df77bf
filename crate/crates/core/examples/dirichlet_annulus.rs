//! Harmonic field on a debonded disk around a driven hole, compared with the
//! logarithmic profile.

use std::sync::Arc;

use debond::dirichlet::{el_residual, solve_dirichlet};
use debond::domain::{BoundaryFace, DomainShape, Grid, GridSpec, RegionMask};

fn main() {
    let (r0, r1, w) = (0.2, 0.5, 1.0);
    let grid = Arc::new(
        Grid::build(&GridSpec {
            shape: DomainShape::Annulus { inner: r0, outer: 1.0 },
            spacing: 0.01,
            gamma: vec![BoundaryFace::InnerCircle],
        })
        .unwrap(),
    );
    let a = RegionMask::from_coords(&grid, |x, y| x.hypot(y) < r1);
    let sol = solve_dirichlet(&grid, &a, &vec![w; grid.gamma_count()]).unwrap();

    let exact = std::f64::consts::PI * w * w / (r1 / r0).ln();
    println!("nodes {}, debonded {}", grid.len(), a.count());
    println!("energy {:.5} (continuum {:.5}), {} CG iterations", sol.energy, exact, sol.iterations);
    println!("largest discrete Laplacian {:.2e}", el_residual(&sol.field, &a));
    for r in [0.25, 0.3, 0.4] {
        let node = (0..grid.len()).min_by(|&p, &q| {
            let d = |n: usize| (grid.coord(n)[0] - r).hypot(grid.coord(n)[1]);
            d(p).total_cmp(&d(q))
        });
        let p = node.unwrap();
        let rr = grid.coord(p)[0].hypot(grid.coord(p)[1]);
        println!("u({rr:.3}) = {:.4}, log profile {:.4}", sol.field.values()[p], w * (r1 / rr).ln() / (r1 / r0).ln());
    }
}
