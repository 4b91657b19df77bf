use std::sync::Arc;

use proptest::prelude::*;

use super::*;
use crate::domain::{BoundaryFace, GridSpec, TimeSeries};
use crate::error::DomainError;
use crate::onedim::constant_kappa_front;

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

struct Setup {
    grid: Arc<Grid>,
    kappa: ToughnessField,
    a0: RegionMask,
    drive: BoundaryDrive,
}

fn moving_front(dx: f64, l0: f64) -> Setup {
    let grid = interval(1.0, dx);
    let a0 = prefix(&grid, l0);
    let kappa = ToughnessField::constant(&grid, 0.5, &a0).unwrap();
    let drive = BoundaryDrive::uniform(&grid, &TimeSeries::ramp(1.0, 0.8).unwrap()).unwrap();
    Setup { grid, kappa, a0, drive }
}

fn run(s: &Setup, steps: usize, opts: &EvolutionOptions) -> EvolutionTrace {
    mm_run(&s.grid, &s.kappa, &s.a0, &s.drive, steps, opts).unwrap()
}

fn quick() -> EvolutionOptions {
    EvolutionOptions { stability_every: 0, ..EvolutionOptions::default() }
}

#[test]
fn initial_state_examples() {
    let s = moving_front(0.01, 0.1);
    let tr = init_evolution(&s.grid, &s.kappa, &s.a0, &s.drive, 10, &EvolutionOptions::default()).unwrap();
    assert_eq!(tr.len(), 1);
    assert_eq!(tr.fields[0].max(), 0.0);
    assert_eq!(tr.sets[0], s.a0);
    let l = tr.ledger[0];
    assert_eq!((l.elastic, l.dissipated, l.work, l.eb_residual), (0.0, 0.0, 0.0, 0.0));
    assert!((l.front - 0.1).abs() < 1e-12);
    assert!(tr.stability[0].as_ref().unwrap().passed);
    assert!((tr.tau() - 0.08).abs() < 1e-15);
    assert_eq!(tr.time(10), 0.8);

    // Positive datum on the boundary with nothing debonded: no admissible field.
    let g = interval(1.0, 0.01);
    let empty = RegionMask::empty(&g);
    let k = ToughnessField::constant(&g, 0.5, &empty).unwrap();
    let d = BoundaryDrive::uniform(&g, &TimeSeries::constant(0.2, 1.0).unwrap()).unwrap();
    let err = init_evolution(&g, &k, &empty, &d, 4, &quick()).unwrap_err();
    assert!(matches!(err, EvolutionError::Init(SolveError::EmptyAdmissibleClass { .. })), "{err:?}");
    assert!(matches!(init_evolution(&g, &k, &empty, &d, 0, &quick()), Err(EvolutionError::NoSteps)));
}

#[test]
fn steps_must_be_in_order() {
    let s = moving_front(0.02, 0.1);
    let mut tr = init_evolution(&s.grid, &s.kappa, &s.a0, &s.drive, 4, &quick()).unwrap();
    assert!(matches!(mm_step(&mut tr, 2), Err(EvolutionError::OutOfOrder(2))));
    assert!(matches!(mm_step(&mut tr, 0), Err(EvolutionError::OutOfOrder(0))));
    mm_step(&mut tr, 1).unwrap();
    assert_eq!(tr.len(), 2);
}

#[test]
fn mismatched_grids_are_rejected() {
    let s = moving_front(0.02, 0.1);
    let other = interval(1.0, 0.05);
    let a = prefix(&other, 0.1);
    let err = init_evolution(&s.grid, &s.kappa, &a, &s.drive, 4, &quick()).unwrap_err();
    assert!(matches!(err, EvolutionError::Domain(DomainError::GridMismatch)));
}

#[test]
fn constant_drive_has_no_residual() {
    let grid = interval(1.0, 0.01);
    let a0 = prefix(&grid, 0.3);
    let kappa = ToughnessField::constant(&grid, 0.5, &a0).unwrap();
    let drive = BoundaryDrive::uniform(&grid, &TimeSeries::constant(0.1, 1.0).unwrap()).unwrap();
    let tr = mm_run(&grid, &kappa, &a0, &drive, 8, &EvolutionOptions::default()).unwrap();
    for l in &tr.ledger {
        assert_eq!(l.work, 0.0);
        assert!(l.eb_residual.abs() < 1e-12, "{l:?}");
        assert!((l.front - 0.3).abs() < 1e-12);
    }
    for s in &tr.sets {
        assert_eq!(*s, a0);
    }
    assert!(tr.warnings.is_empty(), "{:?}", tr.warnings);
}

#[test]
fn front_tracks_closed_form() {
    let dx = 1.0 / 200.0;
    let steps = 40;
    let s = moving_front(dx, 0.1);
    let tr = run(&s, steps, &quick());
    let exact = constant_kappa_front(&TimeSeries::ramp(1.0, 0.8).unwrap(), 0.5, 0.1, 1.0).unwrap();
    let tol = dx + tr.tau() + 1e-12;
    for l in &tr.ledger {
        // At the jump time both fronts are stable; accept either limit.
        let dev = (l.front - exact.front_at(l.t)).abs().min((l.front - exact.front_before(l.t)).abs());
        assert!(dev <= tol, "step {} t {} front {} dev {}", l.step, l.t, l.front, dev);
    }
    assert!(tr.max_abs_residual() <= 5.0 * tr.tau());
}

#[test]
fn runs_are_deterministic() {
    let s = moving_front(0.02, 0.1);
    let a = run(&s, 8, &EvolutionOptions::default());
    let b = run(&s, 8, &EvolutionOptions::default());
    assert_eq!(a.ledger, b.ledger);
    assert_eq!(a.sets, b.sets);
    for (x, y) in a.fields.iter().zip(&b.fields) {
        assert_eq!(x.values(), y.values());
    }
}

#[test]
fn front_position_examples() {
    let g = interval(1.0, 0.01);
    assert!((front_position(&g, &prefix(&g, 0.25)) - 0.25).abs() < 1e-12);
    assert_eq!(front_position(&g, &RegionMask::full(&g)), 1.0);
    let ann = Arc::new(
        Grid::build(&GridSpec {
            shape: DomainShape::Annulus { inner: 0.2, outer: 1.0 },
            spacing: 0.02,
            gamma: vec![BoundaryFace::InnerCircle],
        })
        .unwrap(),
    );
    let set = RegionMask::from_coords(&ann, |x, y| x.hypot(y) < 0.5);
    let r = front_position(&ann, &set);
    assert!((r - 0.5).abs() < 0.02, "{r}");
    assert!(front_position(&ann, &RegionMask::empty(&ann)) == 0.2);
}

#[test]
fn refine_study_shape() {
    let grid = interval(1.0, 0.02);
    let a0 = prefix(&grid, 0.3);
    let kappa = ToughnessField::constant(&grid, 0.5, &a0).unwrap();
    let drive = BoundaryDrive::uniform(&grid, &TimeSeries::constant(0.1, 1.0).unwrap()).unwrap();
    let table = refine_study(&grid, &kappa, &a0, &drive, &[8, 2, 4], &quick()).unwrap();
    assert_eq!(table.rows.iter().map(|r| r.steps).collect::<Vec<_>>(), vec![2, 4, 8]);
    assert_eq!(table.ratios.len(), 2);
    assert!(table.residual_decreasing);
    assert!(refine_study(&grid, &kappa, &a0, &drive, &[4], &quick()).is_err());

    let s = moving_front(1.0 / 100.0, 0.1);
    let table = refine_study(&s.grid, &s.kappa, &s.a0, &s.drive, &[10, 20, 40], &quick()).unwrap();
    for (row, tau) in table.rows.iter().zip([0.08, 0.04, 0.02]) {
        assert!((row.tau - tau).abs() < 1e-15);
        assert!(row.max_abs_residual <= 5.0 * tau, "{row:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn invariants_hold_for_random_physics(
        l0 in 0.05f64..0.4,
        kappa_lo in 0.1f64..1.0,
        kappa_hi in 0.1f64..1.0,
        w_mid in 0.0f64..0.5,
        w_end in 0.0f64..0.6,
    ) {
        let grid = interval(1.0, 0.025);
        let a0 = prefix(&grid, l0);
        let kappa = ToughnessField::from_fn(&grid, |x, _| if x < 0.5 { kappa_lo } else { kappa_hi }, &a0).unwrap();
        let series = TimeSeries::new(vec![0.0, 0.5, 1.0], vec![0.0, w_mid, w_end]).unwrap();
        let drive = BoundaryDrive::uniform(&grid, &series).unwrap();
        let tr = mm_run(&grid, &kappa, &a0, &drive, 6, &EvolutionOptions::default()).unwrap();
        let m = drive.bound();
        for i in 0..tr.len() {
            if i > 0 {
                prop_assert!(tr.sets[i - 1].is_subset(&tr.sets[i]).unwrap());
            }
            prop_assert!(tr.fields[i].min() >= 0.0);
            prop_assert!(tr.fields[i].max() <= m + 1e-8);
            prop_assert!(tr.stability[i].as_ref().unwrap().passed, "step {}", i);
        }
    }
}
