//! Runs a TOML configuration end to end and writes the artifacts the binary
//! would write.

use std::path::PathBuf;

use debond::cli::{load_config, run, Overrides};

fn main() {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/strip.toml")));
    let out = std::env::temp_dir().join("debond_config_run");
    let cfg = load_config(&path, &Overrides { out: Some(out.clone()), ..Overrides::default() }).unwrap();
    let outcome = run(&cfg).unwrap();
    let last = outcome.trace.last();
    println!("{} steps, final front {:.4}, max |residual| {:.2e}", cfg.scheme.steps, last.front, outcome.audit.max_abs_residual);
    for c in &outcome.verdict.conditions {
        println!("{:<22} {}", c.name, if c.passed { "pass" } else { "FAIL" });
    }
    println!("artifacts in {}", out.display());
}
