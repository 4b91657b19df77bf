//! Post-hoc verification of a trace: power and work of the prescribed
//! displacement, energy balance, stability and the set bookkeeping.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dirichlet::{el_residual, solve_dirichlet_with, DirichletOptions};
use crate::domain::{Grid, RegionMask};
use crate::error::SolveError;
use crate::evolution::EvolutionTrace;
use crate::field::{gradient_inner, ScalarField};
use crate::tolerance::Tolerances;

/// Power at the two ends of one time interval, evaluated with the interval's
/// mean boundary rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerInterval {
    /// With the state at the start of the interval. `None` when no admissible
    /// field carries the rate.
    pub start: Option<f64>,
    pub end: Option<f64>,
    /// Same, through the extension of the drive, when one is attached.
    pub start_extension: Option<f64>,
    pub end_extension: Option<f64>,
}

impl PowerInterval {
    /// Trapezoidal work over an interval of length `dt`.
    pub fn trapezoid(&self, dt: f64) -> Option<f64> {
        Some(0.5 * dt * (self.start? + self.end?))
    }

    /// Largest disagreement between the two work formulas.
    pub fn extension_gap(&self) -> Option<f64> {
        let a = (self.start?, self.start_extension?);
        let b = (self.end?, self.end_extension?);
        Some((a.0 - a.1).abs().max((b.0 - b.1).abs()))
    }
}

/// `integral grad h_{A, rate} . grad u`.
///
/// When the rate is a common multiple `c` of the boundary data and `u` is the
/// Dirichlet minimiser on `set`, `h_{A, rate} = c u` and no solve is needed.
/// `Ok(None)` marks an inadmissible rate.
pub fn power_value(
    grid: &Arc<Grid>,
    set: &RegionMask,
    u: &ScalarField,
    rate: &[f64],
    tol: &Tolerances,
    allow_shortcut: bool,
) -> Result<Option<f64>, SolveError> {
    if rate.iter().all(|&r| r == 0.0) {
        return Ok(Some(0.0));
    }
    let energy = u.dirichlet_energy();
    if energy == 0.0 {
        return Ok(Some(0.0));
    }
    if allow_shortcut {
        let w = u.gamma_values();
        if w.iter().all(|&x| x > 0.0) {
            let c = rate[0] / w[0];
            let same = rate.iter().zip(&w).all(|(r, x)| (r / x - c).abs() <= 1e-12 * c.abs().max(1e-300));
            if same {
                return Ok(Some(2.0 * c * energy));
            }
        }
    }
    match solve_dirichlet_with(grid, set, rate, &DirichletOptions { tolerances: *tol, initial: None }) {
        Ok(h) => Ok(Some(gradient_inner(grid, h.field.values(), u.values()))),
        Err(SolveError::EmptyAdmissibleClass { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn interval_power(
    trace: &EvolutionTrace,
    _i: usize,
    prev_field: &ScalarField,
    prev_set: &RegionMask,
    field: &ScalarField,
    set: &RegionMask,
    rate: &[f64],
    t_prev: f64,
    t: f64,
) -> Result<PowerInterval, SolveError> {
    let grid = &trace.grid;
    let tol = trace.options.tolerances;
    let (start, end) = rayon::join(
        || power_value(grid, prev_set, prev_field, rate, &tol, true),
        || power_value(grid, set, field, rate, &tol, true),
    );
    let ext = trace.drive.extension_rate_between(t_prev, t);
    let via = |f: &ScalarField| ext.as_ref().map(|e| gradient_inner(grid, e.values(), f.values()));
    Ok(PowerInterval { start: start?, end: end?, start_extension: via(prev_field), end_extension: via(field) })
}

/// Power at time node `i` via a fresh Dirichlet solve with the right
/// derivative of the drive (left derivative at the final time).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSample {
    pub value: Option<f64>,
    pub via_extension: Option<f64>,
}

pub fn compute_power(trace: &EvolutionTrace, i: usize) -> Result<PowerSample, SolveError> {
    let t = trace.times[i];
    let rate = trace.drive.rate_at(t);
    let tol = trace.options.tolerances;
    let value = power_value(&trace.grid, &trace.sets[i], &trace.fields[i], &rate, &tol, false)?;
    let via_extension = if trace.drive.has_extension() {
        let dt = trace.tau().min(1e-3 * (trace.drive.end() - trace.drive.start()).max(1e-12));
        let (a, b) = if t + dt <= trace.drive.end() { (t, t + dt) } else { (t - dt, t) };
        trace
            .drive
            .extension_rate_between(a, b)
            .map(|e| gradient_inner(&trace.grid, e.values(), trace.fields[i].values()))
    } else {
        None
    };
    Ok(PowerSample { value, via_extension })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AuditOptions {
    /// Constant `C` in `|residual| <= C tau`; `None` means five times the
    /// peak power of the trace.
    pub upper_constant: Option<f64>,
    /// Slack for the one-sided discrete inequalities, relative to
    /// `1 + max(elastic + dissipated)`.
    pub inequality_relative: f64,
}

impl Default for AuditOptions {
    fn default() -> Self {
        AuditOptions { upper_constant: None, inequality_relative: 1e-6 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AuditRow {
    pub step: usize,
    pub t: f64,
    pub eb_residual: f64,
    /// `elastic + dissipated - elastic_0 - work_lower`; non-negative for a
    /// stable scheme.
    pub lower_slack: f64,
    /// `elastic + dissipated - elastic_0 - work_upper`; non-positive.
    pub upper_slack: f64,
    /// Trapezoidal work of the interval ending here (`None` if undefined).
    pub work_increment: Option<f64>,
    pub gs_margin: f64,
    pub gs_pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub rows: Vec<AuditRow>,
    pub tau: f64,
    pub peak_power: f64,
    pub upper_constant: f64,
    pub residual_bound: f64,
    pub inequality_tolerance: f64,
    pub max_abs_residual: f64,
    /// Largest gap between the two work formulas when an extension exists.
    pub extension_gap: Option<f64>,
    pub eb_certified: bool,
    pub eb_passed: bool,
    pub gs_passed: bool,
    pub tolerances: Tolerances,
}

pub fn energy_balance_report(trace: &EvolutionTrace, opts: &AuditOptions) -> AuditReport {
    let l0 = trace.ledger[0];
    let peak_power = trace
        .power
        .iter()
        .flat_map(|p| [p.start, p.end])
        .flatten()
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let upper_constant = opts.upper_constant.unwrap_or(5.0 * peak_power);
    let tau = trace.tau();
    let scale = trace.ledger.iter().map(|l| l.elastic + l.dissipated).fold(0.0f64, f64::max);
    let inequality_tolerance = opts.inequality_relative * (1.0 + scale);
    let rows: Vec<AuditRow> = trace
        .ledger
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let total = l.elastic + l.dissipated - l0.elastic;
            let rep = trace.stability.get(i).and_then(|s| s.as_ref());
            AuditRow {
                step: i,
                t: l.t,
                eb_residual: total - l.work,
                lower_slack: total - l.work_lower,
                upper_slack: total - l.work_upper,
                work_increment: if i == 0 { Some(0.0) } else { trace.power[i - 1].trapezoid(l.t - trace.ledger[i - 1].t) },
                gs_margin: l.gs_margin,
                gs_pass: rep.map(|r| r.passed),
            }
        })
        .collect();
    let max_abs_residual = rows.iter().map(|r| r.eb_residual.abs()).fold(0.0, f64::max);
    let residual_bound = upper_constant * tau + inequality_tolerance;
    let eb_certified = trace.ledger.iter().all(|l| l.certified);
    let eb_passed = max_abs_residual <= residual_bound
        && rows.iter().all(|r| r.lower_slack >= -inequality_tolerance && r.upper_slack <= inequality_tolerance);
    let gs_passed = rows.iter().all(|r| r.gs_pass != Some(false));
    let extension_gap = trace.power.iter().filter_map(|p| p.extension_gap()).reduce(f64::max);
    AuditReport {
        rows,
        tau,
        peak_power,
        upper_constant,
        residual_bound,
        inequality_tolerance,
        max_abs_residual,
        extension_gap,
        eb_certified,
        eb_passed,
        gs_passed,
        tolerances: trace.options.tolerances,
    }
}

/// Outcome for one condition of the definition of an energetic solution, or
/// one bookkeeping invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionVerdict {
    pub name: &'static str,
    pub passed: bool,
    /// False when the check could not be carried out in full.
    pub certified: bool,
    pub worst_step: Option<usize>,
    pub worst_value: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DesVerdict {
    pub conditions: Vec<ConditionVerdict>,
}

impl DesVerdict {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.passed || !c.certified)
    }

    pub fn get(&self, name: &str) -> Option<&ConditionVerdict> {
        self.conditions.iter().find(|c| c.name == name)
    }

    /// Names of certified conditions that failed.
    pub fn failures(&self) -> Vec<&'static str> {
        self.conditions.iter().filter(|c| c.certified && !c.passed).map(|c| c.name).collect()
    }
}

fn verdict(name: &'static str, worst: Option<(usize, f64)>, passed: bool, note: impl Into<String>) -> ConditionVerdict {
    ConditionVerdict {
        name,
        passed,
        certified: true,
        worst_step: worst.map(|w| w.0),
        worst_value: worst.map_or(0.0, |w| w.1),
        note: note.into(),
    }
}

fn worst_of(values: impl Iterator<Item = (usize, f64)>) -> Option<(usize, f64)> {
    values.fold(None, |acc: Option<(usize, f64)>, (i, v)| match acc {
        Some((_, m)) if m >= v => acc,
        _ => Some((i, v)),
    })
}

/// Checklist over a completed trace: compatibility, initial datum, stability,
/// energy balance, irreversibility, reconstruction of the debonded sets,
/// uniform bounds, fixed-point identity and harmonicity.
pub fn des_verdict(trace: &EvolutionTrace, audit: &AuditReport) -> DesVerdict {
    let grid = &trace.grid;
    let tol = trace.options.tolerances;
    let n = trace.len();
    let mut out = Vec::new();

    // (CO): boundary datum carried and zero outside the debonded set.
    let co = worst_of((0..n).map(|i| {
        let f = &trace.fields[i];
        let w = trace.drive.gamma_at(trace.times[i]);
        let bdry = f.gamma_values().iter().zip(&w).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let dpos = trace.delta_pos(i);
        let outside = (0..grid.len())
            .filter(|&p| !trace.sets[i].contains(p) && !grid.is_gamma(p))
            .map(|p| (f.values()[p] - dpos).max(0.0))
            .fold(0.0, f64::max);
        (i, bdry.max(outside))
    }));
    out.push(verdict("compatibility", co, co.is_none_or(|w| w.1 <= tol.field(trace.drive.bound())), "boundary datum and support"));

    // (ID)
    let w0 = trace.drive.gamma_at(trace.times[0]);
    let id = solve_dirichlet_with(grid, &trace.a0, &w0, &DirichletOptions { tolerances: tol, initial: None })
        .map(|h| h.field.max_abs_diff(&trace.fields[0]));
    out.push(match id {
        Ok(d) => verdict("initial_datum", Some((0, d)), d <= 10.0 * tol.field(trace.drive.bound()), "u_0 against h_{A_0, w(0)}"),
        Err(e) => ConditionVerdict {
            name: "initial_datum",
            passed: false,
            certified: true,
            worst_step: Some(0),
            worst_value: f64::NAN,
            note: e.to_string(),
        },
    });

    // (GS)
    let checked = trace.stability.iter().filter(|s| s.is_some()).count();
    let gs = worst_of(
        trace
            .stability
            .iter()
            .enumerate()
            .filter_map(|(i, s)| s.as_ref().map(|r| (i, -r.min_growth_margin / r.tolerance.max(1e-300)))),
    );
    let mut gsv = verdict(
        "global_stability",
        gs.map(|(i, _)| (i, trace.ledger[i].gs_margin)),
        audit.gs_passed,
        format!("{checked} of {n} states checked against sampled growth competitors"),
    );
    gsv.certified = checked > 0;
    out.push(gsv);

    // (EB)
    let eb = worst_of(audit.rows.iter().map(|r| (r.step, r.eb_residual.abs())));
    let mut ebv = verdict(
        "energy_balance",
        eb,
        audit.eb_passed,
        format!("|residual| <= {:.3e}; one-sided inequalities within {:.1e}", audit.residual_bound, audit.inequality_tolerance),
    );
    if !audit.eb_certified {
        ebv.certified = false;
        ebv.note.push_str("; not certified: some interval has no admissible power");
    }
    out.push(ebv);

    // Irreversibility.
    let bad = (1..n).find(|&i| !trace.sets[i - 1].is_subset(&trace.sets[i]).unwrap_or(false));
    out.push(verdict(
        "irreversibility",
        bad.map(|i| (i, 1.0)),
        bad.is_none(),
        "A_{i-1} subset of A_i",
    ));

    // Union of positivity sets.
    let mut union = trace.a0.clone();
    let mut bad = None;
    for i in 0..n {
        let pos = trace.fields[i].positivity(trace.delta_pos(i));
        union = union.union(&pos).unwrap_or(union);
        if union != trace.sets[i] && bad.is_none() {
            bad = Some(i);
        }
    }
    out.push(verdict("reconstruction", bad.map(|i| (i, 1.0)), bad.is_none(), "A_i = A_0 with all positivity sets so far"));

    // Uniform bounds.
    let m = trace.drive.bound();
    let b = worst_of((0..n).map(|i| {
        let f = &trace.fields[i];
        (i, (f.max() - m).max(-f.min()))
    }));
    out.push(verdict("bounds", b, b.is_none_or(|w| w.1 <= 1e-8), format!("0 <= u_i <= M = {m}")));

    // Fixed point and harmonicity.
    let fp: Vec<(usize, f64, f64)> = (0..n)
        .into_par_iter()
        .map(|i| {
            let w = trace.drive.gamma_at(trace.times[i]);
            let h = solve_dirichlet_with(grid, &trace.sets[i], &w, &DirichletOptions { tolerances: tol, initial: Some(&trace.fields[i]) });
            let d = h.map_or(f64::INFINITY, |h| h.field.max_abs_diff(&trace.fields[i]));
            let el = el_residual(&trace.fields[i], &trace.sets[i]);
            let max_w = w.iter().copied().fold(0.0, f64::max);
            (i, d / (10.0 * tol.field(max_w)), el / tol.el(max_w, grid.spacing()))
        })
        .collect();
    let f = worst_of(fp.iter().map(|&(i, d, _)| (i, d)));
    out.push(verdict("fixed_point", f, f.is_none_or(|w| w.1 <= 1.0), "|u_i - h_{A_i, w(t_i)}| over 10 tol (ratio)"));
    let h = worst_of(fp.iter().map(|&(i, _, e)| (i, e)));
    out.push(verdict("harmonicity", h, h.is_none_or(|w| w.1 <= 1.0), "discrete Laplacian on A_i over tol (ratio)"));

    DesVerdict { conditions: out }
}
