//! Toughness c / x^2 with c = w^2 / 2 makes every front in the band equally
//! good: the energy is flat and the front may sit anywhere in it.

use debond::cli::verify;
use debond::io::RunConfig;
use debond::onedim::{check_gs_ell, front_energy, KappaProfile};

fn main() {
    let (w, start, alpha) = (0.3, 0.1, 0.5);
    let kappa = KappaProfile::Flat { w, start, alpha };
    for front in [0.1, 0.2, 0.3, 0.45] {
        let total = front_energy(front, 1.0, w) + kappa.integral(start, front);
        let r = check_gs_ell(front, w, &kappa, 1.0);
        println!("front {front:.2}: elastic + dissipated {total:.6}, worst margin {:+.2e}", r.worst_margin);
    }

    let mut cfg = RunConfig::load(std::path::Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/flat_landscape.toml"))).unwrap();
    cfg.output.dir = std::env::temp_dir().join("debond_flat_landscape");
    let (report, outcome) = verify(&cfg).unwrap();
    println!(
        "simulation: final front {:.4}, band {:?}, energy drift {:.2e}, passed {}",
        outcome.trace.last().front,
        report.flat_band.unwrap(),
        report.energy_drift,
        report.passed
    );
}
