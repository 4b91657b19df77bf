//! Drive spikes whose envelope has unbounded variation in the square-root
//! sense. The front follows the running maximum and never retreats.

use debond::onedim::{build_spiky_drive, constant_kappa_front, envelope_variation};

fn main() {
    for n in [4, 16, 64] {
        let times: Vec<f64> = (0..=n).map(|j| 1.0 / (j as f64 + 1.0)).collect();
        let peaks: Vec<f64> = (1..=n).map(|j| 0.4 / (j * j) as f64).collect();
        let drive = build_spiky_drive(&times, &peaks).unwrap();
        let tr = constant_kappa_front(&drive, 0.5, 0.01, 1.0).unwrap();
        let fronts = tr.sample(&[0.1, 0.5, 1.0]);
        println!(
            "{n:>3} spikes: variation {:.3}, front at t = 0.1, 0.5, 1: {:.4} {:.4} {:.4}",
            envelope_variation(&drive),
            fronts[0],
            fronts[1],
            fronts[2]
        );
    }
}
