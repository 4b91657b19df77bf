//! Energy-balance residual under time-step refinement.

use std::sync::Arc;

use debond::domain::{BoundaryDrive, BoundaryFace, DomainShape, Grid, GridSpec, RegionMask, TimeSeries, ToughnessField};
use debond::evolution::{refine_study, EvolutionOptions};

fn main() {
    let spec = GridSpec { shape: DomainShape::Interval { length: 1.0 }, spacing: 1.0 / 400.0, gamma: vec![BoundaryFace::Left] };
    let grid = Arc::new(Grid::build(&spec).unwrap());
    let a0 = RegionMask::from_coords(&grid, |x, _| x < 0.1 - 1e-9);
    let kappa = ToughnessField::constant(&grid, 0.5, &a0).unwrap();
    let drive = BoundaryDrive::uniform(&grid, &TimeSeries::ramp(1.0, 0.45).unwrap()).unwrap();
    let opts = EvolutionOptions { stability_every: 0, ..EvolutionOptions::default() };
    let table = refine_study(&grid, &kappa, &a0, &drive, &[40, 80, 160], &opts).unwrap();
    for r in &table.rows {
        println!("j {:>4}  tau {:.5}  max |residual| {:.3e}  final front {:.4}", r.steps, r.tau, r.max_abs_residual, r.final_front);
    }
    println!("ratios {:?}, decreasing {}", table.ratios, table.residual_decreasing);
}
