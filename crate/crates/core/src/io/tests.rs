use proptest::prelude::*;

use super::*;
use crate::domain::{BoundaryFace, DomainShape};
use crate::error::DomainError;
use crate::evolution::mm_run;
use crate::field::ScalarField;

const MOVING_FRONT: &str = r#"
[domain]
spacing = 0.01
gamma = ["left"]
shape = { kind = "interval", length = 1.0 }

[physics]
kappa = { kind = "constant", value = 0.5 }
a0 = { kind = "interval", length = 0.1 }
drive = { times = [0.0, 0.8], values = [0.0, 0.8] }

[scheme]
steps = 8
"#;

fn grid(shape: DomainShape, dx: f64, gamma: BoundaryFace) -> Arc<Grid> {
    Arc::new(Grid::build(&GridSpec { shape, spacing: dx, gamma: vec![gamma] }).unwrap())
}

#[test]
fn parses_and_builds() {
    let cfg = RunConfig::parse(MOVING_FRONT).unwrap();
    assert_eq!(cfg.scheme.steps, 8);
    assert_eq!(cfg.output, OutputSection::default());
    assert_eq!(cfg.sweep_counts(), vec![2, 4, 8]);
    let p = cfg.build().unwrap();
    assert_eq!(p.grid.len(), 101);
    assert_eq!(p.a0.count(), 10);
    assert_eq!(p.kappa.value(0), 0.0);
    assert_eq!(p.kappa.value(50), 0.5);
    assert_eq!(p.drive.bound(), 0.8);
    // Serializing and parsing again gives the same configuration.
    assert_eq!(RunConfig::parse(&cfg.to_toml()).unwrap(), cfg);
}

#[test]
fn rejects_unknown_keys() {
    let text = MOVING_FRONT.replace("steps = 8", "steps = 8\nstepz = 9");
    assert!(matches!(RunConfig::parse(&text), Err(IoError::Parse(_))));
    let text = MOVING_FRONT.replace("value = 0.5", "value = 0.5, colour = 1");
    assert!(matches!(RunConfig::parse(&text), Err(IoError::Parse(_))));
}

#[test]
fn negative_toughness_names_the_node() {
    let text = MOVING_FRONT.replace(
        r#"kappa = { kind = "constant", value = 0.5 }"#,
        r#"kappa = { kind = "radial", radii = [0.5], values = [0.5, -1.0] }"#,
    );
    let err = RunConfig::parse(&text).unwrap().build().unwrap_err();
    match err {
        IoError::Domain(DomainError::NegativeToughness { node, value }) => {
            assert_eq!(value, -1.0);
            assert_eq!(node, 50);
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(err_text(&text).contains("node 50"));
}

fn err_text(text: &str) -> String {
    RunConfig::parse(text).unwrap().build().unwrap_err().to_string()
}

#[test]
fn toughness_and_initial_set_variants() {
    let text = MOVING_FRONT.replace(
        r#"kappa = { kind = "constant", value = 0.5 }"#,
        r#"kappa = { kind = "inverse_square", c = 0.045, start = 0.1, alpha = 0.5 }"#,
    );
    let p = RunConfig::parse(&text).unwrap().build().unwrap();
    assert!((p.kappa.value(20) - 0.045 / 0.04).abs() < 1e-12);
    assert!((p.kappa.value(80) - 0.045 / 0.25).abs() < 1e-12);

    let text = MOVING_FRONT.replace(r#"{ kind = "interval", length = 0.1 }"#, r#"{ kind = "empty" }"#);
    let cfg = RunConfig::parse(&text).unwrap();
    assert_eq!(cfg.build().unwrap().a0.count(), 0);
    let text = text.replace("[scheme]", "[scheme]\n").replace("drive =", "fatten = 0.05\ndrive =");
    assert_eq!(RunConfig::parse(&text).unwrap().build().unwrap().a0.count(), 5);

    let bad = MOVING_FRONT.replace("drive =", "bound = 0.5\ndrive =");
    assert!(matches!(RunConfig::parse(&bad).unwrap().build(), Err(IoError::Invalid(_))));
}

#[test]
fn raster_inputs_resolve_relative_paths() {
    let dir = tempfile::tempdir().unwrap();
    let g = grid(DomainShape::Interval { length: 1.0 }, 0.01, BoundaryFace::Left);
    let k = ScalarField::from_fn(&g, |x, _| 0.5 + x);
    write_field_csv(&dir.path().join("kappa.csv"), &k).unwrap();
    let a0 = RegionMask::from_coords(&g, |x, _| x < 0.2);
    write_mask_pgm(&dir.path().join("a0.pgm"), &a0).unwrap();
    let text = MOVING_FRONT
        .replace(r#"{ kind = "constant", value = 0.5 }"#, r#"{ kind = "raster", path = "kappa.csv" }"#)
        .replace(r#"{ kind = "interval", length = 0.1 }"#, r#"{ kind = "mask", path = "a0.pgm" }"#);
    let path = dir.path().join("run.toml");
    std::fs::write(&path, text).unwrap();
    let p = RunConfig::load(&path).unwrap().build().unwrap();
    assert_eq!(p.a0, RegionMask::from_coords(&p.grid, |x, _| x < 0.2));
    assert_eq!(p.kappa.value(70), k.values()[70]);
}

#[test]
fn annulus_mask_round_trip() {
    let g = grid(DomainShape::Annulus { inner: 0.2, outer: 1.0 }, 0.05, BoundaryFace::InnerCircle);
    let m = RegionMask::from_coords(&g, |x, y| x.hypot(y) < 0.5 || x > 0.6);
    let text = mask_to_pgm(&m);
    assert!(text.starts_with("P2\n41 41\n1\n"));
    assert_eq!(mask_from_pgm(&text, &g).unwrap(), m);
    // The centre lies outside the ring and must stay unset.
    let (nx, _) = g.lattice_dims();
    let mut bad: Vec<String> = text.lines().map(str::to_string).collect();
    let mid = 3 + 20;
    let mut row: Vec<&str> = bad[mid].split(' ').collect();
    row[nx / 2] = "1";
    bad[mid] = row.join(" ");
    assert!(mask_from_pgm(&bad.join("\n"), &g).is_err());
    assert!(mask_from_pgm("P5\n1 1\n1\n0", &g).is_err());
}

#[test]
fn ledger_golden_header() {
    let cfg = RunConfig::parse(MOVING_FRONT).unwrap();
    let p = cfg.build().unwrap();
    let tr = mm_run(&p.grid, &p.kappa, &p.a0, &p.drive, 4, &p.options).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("ledger.csv");
    write_ledger_csv(&path, &tr.ledger).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next().unwrap(), LEDGER_COLUMNS.join(","));
    assert_eq!(text.lines().next().unwrap(), "i,t,elastic,dissipated,work,eb_residual,gs_margin,front_stat");
    assert!(text.lines().nth(1).unwrap().starts_with("0,0.0,0.0,0.0,0.0,0.0,"));
    let back = read_ledger_csv(&path).unwrap();
    assert_eq!(back.len(), 5);
    for (a, b) in back.iter().zip(&tr.ledger) {
        let b = LedgerRow::from(b);
        assert_eq!((a.i, a.t, a.elastic, a.work, a.front_stat), (b.i, b.t, b.elastic, b.work, b.front_stat));
        assert!(a.gs_margin == b.gs_margin || (a.gs_margin.is_nan() && b.gs_margin.is_nan()));
    }
    write_stability_csv(&dir.path().join("stab.csv"), &tr.stability).unwrap();
    let stab = std::fs::read_to_string(dir.path().join("stab.csv")).unwrap();
    assert_eq!(stab.lines().next().unwrap(), "step,id,kind,margin,pass");
}

#[test]
fn heatmap_is_written() {
    let g = grid(DomainShape::Rectangle { width: 1.0, height: 0.5 }, 0.1, BoundaryFace::Left);
    let f = ScalarField::from_fn(&g, |x, _| 1.0 - x);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("u.png");
    write_heatmap(&path, &f).unwrap();
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[1..4], b"PNG");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn field_csv_round_trip_is_exact(values in proptest::collection::vec(-1e6f64..1e6, 21)) {
        let g = grid(DomainShape::Interval { length: 1.0 }, 0.05, BoundaryFace::Left);
        let f = ScalarField::new(&g, values).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("f.csv");
        write_field_csv(&path, &f).unwrap();
        let back = read_field_csv(&path, &g).unwrap();
        prop_assert_eq!(back.values(), f.values());
    }

    #[test]
    fn mask_pgm_round_trip_is_exact(bits in proptest::collection::vec(any::<bool>(), 66)) {
        let g = grid(DomainShape::Rectangle { width: 1.0, height: 0.5 }, 0.1, BoundaryFace::Left);
        let m = RegionMask::from_bits(&g, bits).unwrap();
        prop_assert_eq!(mask_from_pgm(&mask_to_pgm(&m), &g).unwrap(), m);
    }
}
