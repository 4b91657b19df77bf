//! Entry points behind the `debond` binary.
//!
//! Exit codes: 0 success, 1 a certified check failed, 2 invalid input or an
//! unsupported configuration, 3 solver failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::audit::{des_verdict, energy_balance_report, AuditReport, DesVerdict};
use crate::domain::{BoundaryFace, DomainShape, TimeSeries};
use crate::error::{EvolutionError, IoError, OneDimError, SolveError};
use crate::evolution::{mm_run, refine_study, EvolutionTrace, PartialRun};
use crate::io::{self, InitialSetSpec, KappaSpec, OutputFormat, RunConfig};
use crate::onedim::{
    check_eb_ell, check_gs_ell, constant_kappa_front, jump_balances, FrontPiece, FrontTrajectory, KappaProfile,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Command-line overrides of a configuration.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub out: Option<PathBuf>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub dump_every: Option<usize>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    OneDim(#[from] OneDimError),
    #[error(transparent)]
    Run(#[from] PartialRun),
    #[error("{0}")]
    Unsupported(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(IoError::Io { .. } | IoError::Format { .. }) => EXIT_SOLVER,
            CliError::Io(_) | CliError::OneDim(_) | CliError::Unsupported(_) => EXIT_INVALID,
            // No admissible field at t = 0 is a property of the input.
            CliError::Run(PartialRun { error: EvolutionError::Init(SolveError::EmptyAdmissibleClass { .. }), .. }) => {
                EXIT_INVALID
            }
            CliError::Run(PartialRun { error: EvolutionError::Domain(_), .. }) => EXIT_INVALID,
            CliError::Run(_) => EXIT_SOLVER,
        }
    }
}

/// Loads a configuration and applies the overrides.
pub fn load_config(path: &Path, ov: &Overrides) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::load(path)?;
    if let Some(o) = &ov.out {
        cfg.output.dir = o.clone();
    }
    if let Some(j) = ov.steps {
        cfg.scheme.steps = j;
    }
    if let Some(s) = ov.seed {
        cfg.scheme.seed = s;
    }
    if let Some(k) = ov.dump_every {
        cfg.output.dump_every = k;
    }
    Ok(cfg)
}

fn create_dir(dir: &Path) -> Result<(), IoError> {
    std::fs::create_dir_all(dir).map_err(|source| IoError::Io { path: dir.display().to_string(), source })
}

fn write_text(path: &Path, text: &str) -> Result<(), IoError> {
    std::fs::write(path, text).map_err(|source| IoError::Io { path: path.display().to_string(), source })
}

/// Result of a simulation run with its audit.
pub struct RunOutcome {
    pub trace: EvolutionTrace,
    pub audit: AuditReport,
    pub verdict: DesVerdict,
}

/// Runs the evolution and the audit and writes every artifact.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome, CliError> {
    let p = cfg.build()?;
    let trace = mm_run(&p.grid, &p.kappa, &p.a0, &p.drive, p.steps, &p.options)?;
    let audit = energy_balance_report(&trace, &cfg.scheme.audit);
    let verdict = des_verdict(&trace, &audit);
    write_run(cfg, &trace, &audit, &verdict)?;
    Ok(RunOutcome { trace, audit, verdict })
}

fn write_run(cfg: &RunConfig, trace: &EvolutionTrace, audit: &AuditReport, verdict: &DesVerdict) -> Result<(), IoError> {
    let dir = &cfg.output.dir;
    create_dir(dir)?;
    write_text(&dir.join("config.toml"), &cfg.to_toml())?;
    io::write_ledger_csv(&dir.join("ledger.csv"), &trace.ledger)?;
    io::write_audit_csv(&dir.join("audit.csv"), &audit.rows)?;
    io::write_stability_csv(&dir.join("stability.csv"), &trace.stability)?;
    write_text(&dir.join("report.txt"), &report_text(trace, audit, verdict))?;

    let formats = &cfg.output.formats;
    let last = trace.len() - 1;
    let every = cfg.output.dump_every;
    let dumps = (0..trace.len()).filter(|&i| i == last || (every > 0 && i % every == 0));
    for f in formats {
        create_dir(&dir.join(match f {
            OutputFormat::Csv => "fields",
            OutputFormat::Pgm => "masks",
            OutputFormat::Png => "heatmaps",
        }))?;
    }
    for i in dumps {
        for f in formats {
            match f {
                OutputFormat::Csv => io::write_field_csv(&dir.join(format!("fields/step_{i:05}.csv")), &trace.fields[i])?,
                OutputFormat::Pgm => io::write_mask_pgm(&dir.join(format!("masks/step_{i:05}.pgm")), &trace.sets[i])?,
                OutputFormat::Png if trace.grid.dim() == 2 => {
                    io::write_heatmap(&dir.join(format!("heatmaps/step_{i:05}.png")), &trace.fields[i])?
                }
                OutputFormat::Png => {}
            }
        }
    }
    Ok(())
}

fn report_text(trace: &EvolutionTrace, audit: &AuditReport, verdict: &DesVerdict) -> String {
    let mut s = String::new();
    let last = trace.last();
    let _ = writeln!(s, "steps {} tau {:e}", trace.steps, trace.tau());
    let _ = writeln!(s, "final t {} front {} elastic {} dissipated {} work {}", last.t, last.front, last.elastic, last.dissipated, last.work);
    let _ = writeln!(
        s,
        "max |residual| {:e} bound {:e} (C = {:e}, peak power {:e})",
        audit.max_abs_residual, audit.residual_bound, audit.upper_constant, audit.peak_power
    );
    if let Some(g) = audit.extension_gap {
        let _ = writeln!(s, "work formula gap {g:e}");
    }
    for c in &verdict.conditions {
        let status = match (c.certified, c.passed) {
            (false, _) => "UNCERTIFIED",
            (true, true) => "PASS",
            (true, false) => "FAIL",
        };
        let _ = writeln!(s, "{:<17} {status:<11} worst {:e} at {:?}: {}", c.name, c.worst_value, c.worst_step, c.note);
    }
    for w in &trace.warnings {
        let _ = writeln!(s, "warning: {w}");
    }
    s
}

pub fn cmd_run(config: &Path, ov: &Overrides) -> i32 {
    let outcome = load_config(config, ov).and_then(|cfg| run(&cfg).map(|o| (cfg, o)));
    match outcome {
        Ok((cfg, o)) => {
            print!("{}", report_text(&o.trace, &o.audit, &o.verdict));
            println!("artifacts in {}", cfg.output.dir.display());
            if o.verdict.passed() {
                EXIT_OK
            } else {
                eprintln!("failed conditions: {}", o.verdict.failures().join(", "));
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => fail(e),
    }
}

fn fail(e: CliError) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}

/// Closed-form trajectory for a one-dimensional configuration.
pub fn oracle_trajectory(cfg: &RunConfig) -> Result<FrontTrajectory, CliError> {
    let length = match cfg.domain.shape {
        DomainShape::Interval { length } => length,
        _ => return Err(CliError::Unsupported("closed forms exist for the interval only".into())),
    };
    if cfg.domain.gamma != [BoundaryFace::Left] {
        return Err(CliError::Unsupported("closed forms need the drive on the left end only".into()));
    }
    let ph = &cfg.physics;
    if ph.fatten > 0.0 {
        return Err(CliError::Unsupported("fattened initial sets have no closed form".into()));
    }
    let l0 = match ph.a0 {
        InitialSetSpec::Empty => 0.0,
        InitialSetSpec::Interval { length } => length,
        _ => return Err(CliError::Unsupported("initial set must be empty or an interval".into())),
    };
    let drive = TimeSeries::new(ph.drive.times.clone(), ph.drive.values.clone()).map_err(IoError::from)?;
    match ph.kappa {
        KappaSpec::Constant { value } => Ok(constant_kappa_front(&drive, value, l0, length)?),
        KappaSpec::InverseSquare { c, start, alpha: Some(alpha) } => {
            // Flat landscape: every front in [start, alpha) is stable and
            // balanced; the oracle is the stationary one.
            let w = drive.values()[0];
            let flat = drive.values().iter().all(|&v| v == w) && (0.5 * w * w - c).abs() <= 1e-12 * c && start == l0;
            if !flat {
                return Err(OneDimError::UnsupportedDriveClass(
                    "inverse-square toughness needs the constant drive w with c = w^2/2 and start = l0".into(),
                )
                .into());
            }
            let t = (drive.start(), drive.end());
            Ok(FrontTrajectory::from_pieces(
                drive,
                KappaProfile::Flat { w, start, alpha },
                length,
                vec![FrontPiece { t0: t.0, t1: t.1, front0: l0, front1: l0 }],
            )?)
        }
        _ => Err(OneDimError::UnsupportedDriveClass("no closed form for this toughness".into()).into()),
    }
}

/// Closed-form checks of a trajectory.
pub struct OracleReport {
    pub max_abs_residual: f64,
    pub worst_gs_margin: f64,
    pub gs_passed: bool,
    pub jump_mismatch: f64,
}

pub fn oracle_report(tr: &FrontTrajectory) -> OracleReport {
    let eb = check_eb_ell(tr);
    let max_abs_residual = eb.iter().map(|s| s.residual.abs()).fold(0.0, f64::max);
    let (t0, t1) = (tr.drive().start(), tr.drive().end());
    let mut times: Vec<f64> = (0..=1000).map(|k| t0 + (t1 - t0) * k as f64 / 1000.0).collect();
    times.extend(tr.pieces().iter().flat_map(|p| [p.t0, p.t1]));
    let mut worst_gs_margin = f64::INFINITY;
    let mut gs_passed = true;
    for t in times {
        let r = check_gs_ell(tr.front_at(t), tr.drive().value(t), tr.kappa(), tr.length());
        worst_gs_margin = worst_gs_margin.min(r.worst_margin);
        gs_passed &= r.passed;
    }
    let jump_mismatch = jump_balances(tr).iter().map(|j| (j.elastic_drop - j.dissipated).abs()).fold(0.0, f64::max);
    OracleReport { max_abs_residual, worst_gs_margin, gs_passed, jump_mismatch }
}

pub fn cmd_oracle1d(config: &Path, ov: &Overrides) -> i32 {
    let result = load_config(config, ov).and_then(|cfg| {
        let tr = oracle_trajectory(&cfg)?;
        create_dir(&cfg.output.dir)?;
        io::write_trajectory_csv(&cfg.output.dir.join("trajectory.csv"), &check_eb_ell(&tr))?;
        Ok(tr)
    });
    match result {
        Ok(tr) => {
            let r = oracle_report(&tr);
            println!("jumps at {:?}", tr.jumps());
            println!("max |residual| {:e}", r.max_abs_residual);
            println!("jump balance mismatch {:e}", r.jump_mismatch);
            println!("worst stability margin {:e} ({})", r.worst_gs_margin, if r.gs_passed { "pass" } else { "FAIL" });
            let scale = tr.drive().values().iter().fold(1.0f64, |m, v| m.max(v * v));
            if r.gs_passed && r.max_abs_residual <= 1e-12 * scale && r.jump_mismatch <= 1e-12 * scale {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => fail(e),
    }
}

/// Simulation against the closed form.
#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    /// Largest front deviation, taking either one-sided limit at jumps.
    pub max_front_deviation: f64,
    pub front_tolerance: f64,
    pub max_abs_residual: f64,
    pub residual_bound: f64,
    /// Flat landscapes: the front is only required to stay in the flat band
    /// and the total energy to stay at its initial value.
    pub flat_band: Option<(f64, f64)>,
    pub energy_drift: f64,
    pub passed: bool,
}

/// Distance from a simulated front to the closed form at `t`. Either
/// one-sided limit is accepted at a jump, and so is a jump of the closed form
/// that lies within one step of `t`: a discrete scheme resolves jump times
/// only up to the step.
pub fn front_deviation(oracle: &FrontTrajectory, t: f64, front: f64, tau: f64) -> f64 {
    let mut best = (front - oracle.front_at(t)).abs().min((front - oracle.front_before(t)).abs());
    for &tj in oracle.jumps() {
        if (tj - t).abs() <= tau {
            best = best.min((front - oracle.front_before(tj)).abs()).min((front - oracle.front_at(tj)).abs());
        }
    }
    best
}

pub fn verify(cfg: &RunConfig) -> Result<(VerifyReport, RunOutcome), CliError> {
    let oracle = oracle_trajectory(cfg)?;
    let outcome = run(cfg)?;
    let tr = &outcome.trace;
    let dx = tr.grid.spacing();
    let front_tolerance = dx + tr.tau() + 1e-12;
    let (flat_band, energy_drift) = match *oracle.kappa() {
        KappaProfile::Flat { start, alpha, .. } => {
            let e0 = tr.ledger[0].elastic + tr.ledger[0].dissipated;
            let drift = tr.ledger.iter().map(|l| (l.elastic + l.dissipated - e0).abs()).fold(0.0, f64::max) / e0.max(1e-300);
            (Some((start - dx, alpha + dx)), drift)
        }
        KappaProfile::Constant { .. } => (None, 0.0),
    };
    let max_front_deviation = tr
        .ledger
        .iter()
        .map(|l| match flat_band {
            Some((lo, hi)) => (lo - l.front).max(l.front - hi).max(0.0),
            None => front_deviation(&oracle, l.t, l.front, tr.tau()),
        })
        .fold(0.0, f64::max);
    let passed = max_front_deviation <= if flat_band.is_some() { 0.0 } else { front_tolerance }
        && outcome.audit.max_abs_residual <= outcome.audit.residual_bound
        && energy_drift <= 1e-3;
    let report = VerifyReport {
        max_front_deviation,
        front_tolerance,
        max_abs_residual: outcome.audit.max_abs_residual,
        residual_bound: outcome.audit.residual_bound,
        flat_band,
        energy_drift,
        passed,
    };
    Ok((report, outcome))
}

pub fn cmd_verify(config: &Path, ov: &Overrides) -> i32 {
    match load_config(config, ov).and_then(|cfg| verify(&cfg)) {
        Ok((r, o)) => {
            match r.flat_band {
                Some((lo, hi)) => println!("front band [{lo}, {hi}], excursion {:e}, energy drift {:e}", r.max_front_deviation, r.energy_drift),
                None => println!("max front deviation {:e} (tolerance {:e})", r.max_front_deviation, r.front_tolerance),
            }
            println!("max |residual| {:e} (bound {:e})", r.max_abs_residual, r.residual_bound);
            if r.passed {
                EXIT_OK
            } else {
                let worst = o
                    .trace
                    .ledger
                    .iter()
                    .max_by(|a, b| a.eb_residual.abs().total_cmp(&b.eb_residual.abs()))
                    .expect("non-empty ledger");
                eprintln!("verification failed; largest residual at step {} (t = {})", worst.step, worst.t);
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => fail(e),
    }
}

pub fn cmd_sweep(config: &Path, ov: &Overrides) -> i32 {
    let result = load_config(config, ov).and_then(|cfg| {
        let p = cfg.build()?;
        let table = refine_study(&p.grid, &p.kappa, &p.a0, &p.drive, &cfg.sweep_counts(), &p.options)?;
        create_dir(&cfg.output.dir)?;
        io::write_convergence_csv(&cfg.output.dir.join("convergence.csv"), &table)?;
        Ok(table)
    });
    match result {
        Ok(table) => {
            for r in &table.rows {
                println!("j {:>5} tau {:.3e} max |residual| {:.3e} final front {}", r.steps, r.tau, r.max_abs_residual, r.final_front);
            }
            println!("ratios {:?}", table.ratios);
            if table.residual_decreasing {
                EXIT_OK
            } else {
                eprintln!("maximal residual does not decrease under refinement");
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => fail(e),
    }
}
