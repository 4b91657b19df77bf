//! Radially symmetric debonding around a pulled hole. Pass a spacing
//! denominator to refine (the default 50 runs in seconds; 200 is the full
//! resolution study).

use std::sync::Arc;

use debond::audit::{des_verdict, energy_balance_report, AuditOptions};
use debond::domain::{BoundaryDrive, BoundaryFace, DomainShape, Grid, GridSpec, RegionMask, TimeSeries, ToughnessField};
use debond::evolution::{init_evolution, mm_step, EvolutionOptions};

/// Minimiser of pi w^2 / log(r / r0) + pi kappa (r^2 - r_init^2) over a fine radius scan.
fn radial_front(w: f64, kappa: f64, r0: f64, r_init: f64, outer: f64) -> f64 {
    let g = |r: f64| std::f64::consts::PI * (w * w / (r / r0).ln() + kappa * (r * r - r_init * r_init));
    (0..=100_000).map(|k| r_init + (outer - r_init) * k as f64 / 100_000.0).min_by(|a, b| g(*a).total_cmp(&g(*b))).unwrap()
}

fn main() {
    let n: f64 = std::env::args().nth(1).map_or(50.0, |s| s.parse().expect("spacing denominator"));
    let (r0, kappa, w_end) = (0.2, 1.0, 0.6479);
    let grid = Arc::new(
        Grid::build(&GridSpec {
            shape: DomainShape::Annulus { inner: r0, outer: 1.0 },
            spacing: 1.0 / n,
            gamma: vec![BoundaryFace::InnerCircle],
        })
        .unwrap(),
    );
    let a0 = RegionMask::from_coords(&grid, |x, y| x.hypot(y) < 0.22);
    let k = ToughnessField::constant(&grid, kappa, &a0).unwrap();
    let drive = BoundaryDrive::uniform(&grid, &TimeSeries::ramp(w_end, 1.0).unwrap()).unwrap();
    let opts = EvolutionOptions { stability_every: 10, ..EvolutionOptions::default() };
    let steps = 50;
    println!("{} nodes", grid.len());

    let mut trace = init_evolution(&grid, &k, &a0, &drive, steps, &opts).unwrap();
    for i in 1..=steps {
        mm_step(&mut trace, i).unwrap();
        if i % 10 == 0 {
            let l = trace.last();
            let exact = radial_front(w_end * l.t, kappa, r0, 0.22, 1.0);
            println!("t {:.2}  radius {:.4}  scan {:.4}  residual {:+.2e}", l.t, l.front, exact, l.eb_residual);
        }
    }
    let audit = energy_balance_report(&trace, &AuditOptions::default());
    let verdict = des_verdict(&trace, &audit);
    println!("failed conditions: {:?}", verdict.failures());
}
