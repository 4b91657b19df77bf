//! A bar that starts more than half debonded: it holds until the stability
//! threshold and then debonds completely. The energy released by the jump
//! equals the toughness paid for the new surface.

use std::sync::Arc;

use debond::domain::{BoundaryDrive, BoundaryFace, DomainShape, Grid, GridSpec, RegionMask, TimeSeries, ToughnessField};
use debond::evolution::{mm_run, EvolutionOptions};
use debond::onedim::{check_gs_ell, constant_kappa_front, jump_balances, KappaProfile};

fn main() {
    let series = TimeSeries::ramp(1.0, 0.8).unwrap();
    let oracle = constant_kappa_front(&series, 0.5, 0.6, 1.0).unwrap();
    let tj = oracle.jumps()[0];
    println!("closed form jumps at t = {tj:.5} (sqrt(0.24) = {:.5})", 0.24f64.sqrt());
    for j in jump_balances(&oracle) {
        println!("jump {:.3} -> {:.3}: elastic drop {:.6}, dissipated {:.6}", j.from, j.to, j.elastic_drop, j.dissipated);
    }
    let kappa = KappaProfile::Constant { value: 0.5 };
    for t in [tj - 0.01, tj, tj + 0.01] {
        let r = check_gs_ell(0.6, t, &kappa, 1.0);
        println!("front 0.6 at t {t:.4}: worst margin {:+.3e} ({})", r.worst_margin, if r.passed { "stable" } else { "unstable" });
    }

    let spec = GridSpec { shape: DomainShape::Interval { length: 1.0 }, spacing: 1.0 / 400.0, gamma: vec![BoundaryFace::Left] };
    let grid = Arc::new(Grid::build(&spec).unwrap());
    let a0 = RegionMask::from_coords(&grid, |x, _| x < 0.6 - 1e-9);
    let k = ToughnessField::constant(&grid, 0.5, &a0).unwrap();
    let drive = BoundaryDrive::uniform(&grid, &series).unwrap();
    let trace = mm_run(&grid, &k, &a0, &drive, 160, &EvolutionOptions::default()).unwrap();
    let step = trace.ledger.windows(2).find(|p| p[1].front - p[0].front > 0.1).map(|p| (p[0].t, p[1].t));
    if let Some((before, after)) = step {
        println!("simulation jumps between t = {before} and t = {after}, estimate {:.4}", 0.5 * (before + after));
    }
    println!("final front {}, max |residual| {:.2e}", trace.last().front, trace.max_abs_residual());
}
