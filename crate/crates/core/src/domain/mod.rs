//! Discretised reference configuration: grid, node masks, toughness and drive.

mod drive;
mod grid;
pub(crate) mod mask;
mod toughness;

use std::sync::Arc;

pub use drive::{BoundaryDrive, TimeSeries};
pub use grid::{BoundaryFace, DomainShape, Grid, GridSpec, NodeTag, DIRECTIONS};
pub use mask::RegionMask;
pub use toughness::ToughnessField;

/// `a0` together with every node at distance less than `eps` from the
/// Dirichlet boundary.
pub fn fatten_initial_set(grid: &Arc<Grid>, a0: &RegionMask, eps: f64) -> RegionMask {
    if !(eps > 0.0) {
        return a0.clone();
    }
    let r = grid.lattice_units(eps);
    let dist = grid.lattice_distance_sq(|i| grid.is_gamma(i));
    let mut out = a0.clone();
    for (i, &d) in dist.iter().enumerate() {
        if (d as f64) < r * r {
            out.set(i, true);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

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

    fn square(side: f64, dx: f64) -> Arc<Grid> {
        Arc::new(
            Grid::build(&GridSpec {
                shape: DomainShape::Rectangle { width: side, height: side },
                spacing: dx,
                gamma: vec![BoundaryFace::Left],
            })
            .unwrap(),
        )
    }

    #[test]
    fn interval_has_one_boundary_node() {
        let g = interval(1.0, 0.01);
        assert_eq!(g.len(), 101);
        assert_eq!(g.gamma_nodes(), &[0]);
        assert_eq!(g.tag(0), NodeTag::Gamma);
        assert_eq!(g.tag(100), NodeTag::Neumann);
        assert_eq!(g.tag(50), NodeTag::Interior);
        assert!((g.measure() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rectangle_left_edge() {
        let g = square(1.0, 0.02);
        assert_eq!(g.len(), 51 * 51);
        assert_eq!(g.gamma_count(), 51);
        assert!(g.gamma_nodes().iter().all(|&i| g.coord(i)[0] == 0.0));
        assert!((g.measure() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn annulus_inner_ring() {
        let g = Arc::new(
            Grid::build(&GridSpec {
                shape: DomainShape::Annulus { inner: 0.2, outer: 1.0 },
                spacing: 0.01,
                gamma: vec![BoundaryFace::InnerCircle],
            })
            .unwrap(),
        );
        for i in 0..g.len() {
            let [x, y] = g.coord(i);
            let r = x.hypot(y);
            assert!(r >= 0.2 - 1e-9 && r <= 1.0 + 1e-9);
        }
        for &i in g.gamma_nodes() {
            let [x, y] = g.coord(i);
            assert!(x.hypot(y) < 0.2 + 0.02, "gamma node off the inner ring");
        }
        // every lattice point in the ring is active
        let (nx, ny) = g.lattice_dims();
        let mut expected = 0;
        for iy in 0..ny {
            for ix in 0..nx {
                let x = -1.0 + ix as f64 * 0.01;
                let y = -1.0 + iy as f64 * 0.01;
                let r = x.hypot(y);
                if r >= 0.2 * (1.0 - 1e-12) && r <= 1.0 + 1e-12 {
                    expected += 1;
                }
            }
        }
        assert_eq!(g.len(), expected);
        let ring = 2.0 * std::f64::consts::PI * 0.2 / 0.01;
        assert!((g.gamma_count() as f64) > ring * 0.9);
    }

    #[test]
    fn build_errors() {
        let bad = |spec: GridSpec| Grid::build(&spec).unwrap_err();
        let e = bad(GridSpec { shape: DomainShape::Interval { length: 1.0 }, spacing: 0.0, gamma: vec![BoundaryFace::Left] });
        assert_eq!(e, DomainError::NonPositiveSpacing(0.0));
        let e = bad(GridSpec { shape: DomainShape::Interval { length: 1.0 }, spacing: 0.1, gamma: vec![] });
        assert_eq!(e, DomainError::EmptyGamma);
        let e = bad(GridSpec { shape: DomainShape::Interval { length: 1.0 }, spacing: 0.3, gamma: vec![BoundaryFace::Left] });
        assert!(matches!(e, DomainError::InvalidExtent(_)));
        let e = bad(GridSpec { shape: DomainShape::Interval { length: 1.0 }, spacing: 0.1, gamma: vec![BoundaryFace::Top] });
        assert!(matches!(e, DomainError::InvalidExtent(_)));
    }

    use crate::error::DomainError;

    #[test]
    fn mask_identity_and_half() {
        let g = square(1.0, 0.05);
        let left = RegionMask::from_coords(&g, |x, _| x < 0.5 - 1e-9);
        assert!(left.difference(&left).unwrap().is_empty());
        assert!(left.is_subset(&left).unwrap());
        let full = RegionMask::full(&g);
        assert!(left.is_subset(&full).unwrap());
        let rest = full.difference(&left).unwrap().measure();
        assert!((rest - 0.5).abs() <= 0.05 + 1e-12, "{rest}");
    }

    #[test]
    fn mask_grid_mismatch() {
        let a = RegionMask::empty(&interval(1.0, 0.1));
        let b = RegionMask::empty(&interval(1.0, 0.05));
        assert_eq!(a.union(&b).unwrap_err(), DomainError::GridMismatch);
        assert_eq!(a.is_subset(&b).unwrap_err(), DomainError::GridMismatch);
    }

    #[test]
    fn fatten_examples() {
        let g = interval(1.0, 0.01);
        let a0 = RegionMask::empty(&g);
        assert_eq!(fatten_initial_set(&g, &a0, 0.0), a0);
        let f = fatten_initial_set(&g, &a0, 0.05);
        assert_eq!(f.iter().collect::<Vec<_>>(), vec![0, 1, 2, 3, 4]);

        let g = square(1.0, 0.02);
        let f = fatten_initial_set(&g, &RegionMask::empty(&g), 0.1);
        for i in 0..g.len() {
            assert_eq!(f.contains(i), g.coord(i)[0] < 0.1 - 1e-9, "node {i}");
        }
    }

    #[test]
    fn toughness_validation() {
        let g = interval(1.0, 0.1);
        let a0 = RegionMask::from_coords(&g, |x, _| x < 0.25);
        let k = ToughnessField::constant(&g, 2.0, &a0).unwrap();
        assert_eq!(k.value(0), 0.0);
        assert_eq!(k.value(5), 2.0);
        let mut v = vec![1.0; g.len()];
        v[7] = -1.0;
        assert_eq!(
            ToughnessField::new(&g, v, &a0).unwrap_err(),
            DomainError::NegativeToughness { node: 7, value: -1.0 }
        );
        let mut v = vec![1.0; g.len()];
        v[1] = -5.0; // inside a0, normalised away
        v[6] = 0.0;
        assert_eq!(ToughnessField::new(&g, v, &a0).unwrap_err(), DomainError::VanishingToughness { node: 6 });
    }

    #[test]
    fn running_max_inserts_crossings() {
        let s = TimeSeries::new(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 0.0, 2.0]).unwrap();
        let m = s.running_max();
        assert_eq!(m.times(), &[0.0, 1.0, 2.0, 2.5, 3.0]);
        assert_eq!(m.values(), &[0.0, 1.0, 1.0, 1.0, 2.0]);
        assert_eq!(s.value(2.5), 1.0);
        assert_eq!(s.slope(2.0), 2.0);
        assert_eq!(s.slope(1.5), -1.0);
    }

    #[test]
    fn drive_rejects_negative_data() {
        let g = interval(1.0, 0.1);
        let s = TimeSeries::new(vec![0.0, 1.0], vec![0.0, -1.0]).unwrap();
        assert!(matches!(BoundaryDrive::uniform(&g, &s), Err(DomainError::InvalidDrive(_))));
        let s = TimeSeries::ramp(2.0, 1.0).unwrap();
        let d = BoundaryDrive::uniform(&g, &s).unwrap();
        assert_eq!(d.bound(), 2.0);
        assert_eq!(d.gamma_at(0.25), vec![0.5]);
        assert_eq!(d.rate_between(0.1, 0.6), vec![2.0]);
    }

    #[test]
    fn cutoff_extension_matches_boundary() {
        let g = interval(1.0, 0.1);
        let a0 = RegionMask::from_coords(&g, |x, _| x < 0.35);
        let s = TimeSeries::ramp(1.0, 1.0).unwrap();
        let d = BoundaryDrive::uniform(&g, &s).unwrap().with_cutoff_extension(&a0).unwrap();
        let e = d.extension_at(0.5).unwrap();
        assert_eq!(e.values()[0], 0.5);
        assert!(e.values()[1] > 0.0 && e.values()[1] < 0.5);
        assert!(e.values()[4..].iter().all(|&v| v == 0.0));
        let bad = RegionMask::empty(&g);
        assert!(BoundaryDrive::uniform(&g, &s).unwrap().with_cutoff_extension(&bad).is_err());
    }

    fn brute_mask(bits: &[bool]) -> Vec<bool> {
        bits.to_vec()
    }

    proptest! {
        #[test]
        fn mask_algebra_matches_enumeration(a in proptest::collection::vec(any::<bool>(), 16),
                                            b in proptest::collection::vec(any::<bool>(), 16)) {
            let g = square(0.3, 0.1);
            prop_assert_eq!(g.len(), 16);
            let ma = RegionMask::from_bits(&g, brute_mask(&a)).unwrap();
            let mb = RegionMask::from_bits(&g, brute_mask(&b)).unwrap();
            let u = ma.union(&mb).unwrap();
            let d = ma.difference(&mb).unwrap();
            let x = ma.intersection(&mb).unwrap();
            for i in 0..16 {
                prop_assert_eq!(u.contains(i), a[i] || b[i]);
                prop_assert_eq!(d.contains(i), a[i] && !b[i]);
                prop_assert_eq!(x.contains(i), a[i] && b[i]);
            }
            let sub = (0..16).all(|i| !a[i] || b[i]);
            prop_assert_eq!(ma.is_subset(&mb).unwrap(), sub);
            prop_assert_eq!(d.measure_units() + x.measure_units(), ma.measure_units());
            let units: u64 = (0..16).filter(|&i| a[i]).map(|i| u64::from(g.volume_units(i))).sum();
            prop_assert_eq!(ma.measure_units(), units);
        }

        #[test]
        fn fatten_is_monotone(e1 in 0.0f64..0.5, e2 in 0.0f64..0.5) {
            let g = square(1.0, 0.05);
            let a0 = RegionMask::from_coords(&g, |x, y| (x - 0.5).hypot(y - 0.5) < 0.2);
            let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
            let small = fatten_initial_set(&g, &a0, lo);
            let big = fatten_initial_set(&g, &a0, hi);
            prop_assert!(a0.is_subset(&small).unwrap());
            prop_assert!(small.is_subset(&big).unwrap());
        }
    }
}
