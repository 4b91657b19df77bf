//! Linearly growing drive on a bar: the front follows t until half the bar
//! is debonded, then snaps to the end. Simulation against the closed form.

use std::sync::Arc;

use debond::audit::{des_verdict, energy_balance_report, AuditOptions};
use debond::cli::front_deviation;
use debond::domain::{BoundaryDrive, BoundaryFace, DomainShape, Grid, GridSpec, RegionMask, TimeSeries, ToughnessField};
use debond::evolution::{mm_run, EvolutionOptions};
use debond::onedim::constant_kappa_front;

fn main() {
    let spec = GridSpec { shape: DomainShape::Interval { length: 1.0 }, spacing: 1.0 / 400.0, gamma: vec![BoundaryFace::Left] };
    let grid = Arc::new(Grid::build(&spec).unwrap());
    let a0 = RegionMask::from_coords(&grid, |x, _| x < 0.1 - 1e-9);
    let kappa = ToughnessField::constant(&grid, 0.5, &a0).unwrap();
    let series = TimeSeries::ramp(1.0, 0.8).unwrap();
    let drive = BoundaryDrive::uniform(&grid, &series).unwrap();

    let trace = mm_run(&grid, &kappa, &a0, &drive, 160, &EvolutionOptions::default()).unwrap();
    let oracle = constant_kappa_front(&series, 0.5, 0.1, 1.0).unwrap();
    let audit = energy_balance_report(&trace, &AuditOptions::default());

    for l in trace.ledger.iter().step_by(20) {
        println!("t {:.3}  front {:.4}  exact {:.4}  residual {:+.2e}", l.t, l.front, oracle.front_at(l.t), l.eb_residual);
    }
    let dev = trace.ledger.iter().map(|l| front_deviation(&oracle, l.t, l.front, trace.tau())).fold(0.0, f64::max);
    println!("jumps of the closed form at {:?}", oracle.jumps());
    println!("max front deviation {dev:.2e}, max |residual| {:.2e} <= {:.2e}", audit.max_abs_residual, audit.residual_bound);
    let verdict = des_verdict(&trace, &audit);
    for c in &verdict.conditions {
        println!("{:<22} {}", c.name, if c.passed { "pass" } else { "FAIL" });
    }
}
