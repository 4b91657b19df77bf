//! Minimizing Movements driver: one Alt-Caffarelli minimisation per time
//! step, irreversible union of positivity sets, energy ledger.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::audit::{interval_power, PowerInterval};
use crate::bernoulli::{ac_value_with, minimize_ac_with, stability_check, AcOptions, CompetitorFamily, StabilityReport};
use crate::dirichlet::{solve_dirichlet_with, DirichletOptions};
use crate::domain::{BoundaryDrive, DomainShape, Grid, RegionMask, ToughnessField};
use crate::error::{EvolutionError, SolveError};
use crate::field::ScalarField;
use crate::tolerance::Tolerances;

/// Tunables of the inner Alt-Caffarelli solve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AcSettings {
    pub levels: usize,
    pub max_active_set_iterations: usize,
    pub polish_shells: usize,
    pub max_polish_rounds: usize,
    pub window_layers: usize,
    pub single_flip_limit: usize,
    pub dilation_scan: usize,
    /// Seed each step with the previous field.
    pub warm_start: bool,
}

impl Default for AcSettings {
    fn default() -> Self {
        let d = AcOptions::default();
        AcSettings {
            levels: d.levels,
            max_active_set_iterations: d.max_active_set_iterations,
            polish_shells: d.polish_shells,
            max_polish_rounds: d.max_polish_rounds,
            window_layers: d.window_layers,
            single_flip_limit: d.single_flip_limit,
            dilation_scan: d.dilation_scan,
            warm_start: true,
        }
    }
}

impl AcSettings {
    pub(crate) fn options<'a>(&self, tolerances: Tolerances, warm: Option<&'a ScalarField>) -> AcOptions<'a> {
        AcOptions {
            tolerances,
            warm_start: if self.warm_start { warm } else { None },
            levels: self.levels,
            max_active_set_iterations: self.max_active_set_iterations,
            polish_shells: self.polish_shells,
            max_polish_rounds: self.max_polish_rounds,
            window_layers: self.window_layers,
            single_flip_limit: self.single_flip_limit,
            dilation_scan: self.dilation_scan,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolutionOptions {
    pub tolerances: Tolerances,
    pub ac: AcSettings,
    pub competitors: CompetitorFamily,
    /// Run the stability check every this many steps (0 disables it).
    pub stability_every: usize,
    /// Check stability of the initial state.
    pub check_initial_stability: bool,
}

impl Default for EvolutionOptions {
    fn default() -> Self {
        EvolutionOptions {
            tolerances: Tolerances::default(),
            ac: AcSettings::default(),
            competitors: CompetitorFamily::default(),
            stability_every: 1,
            check_initial_stability: true,
        }
    }
}

/// Energy bookkeeping at one time node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyLedger {
    pub step: usize,
    pub t: f64,
    /// `1/2 integral |grad u_i|^2`.
    pub elastic: f64,
    /// `integral_{A_i \ A_0} kappa`.
    pub dissipated: f64,
    /// Trapezoidal work of the prescribed displacement up to `t_i`.
    pub work: f64,
    /// `elastic + dissipated - elastic_0 - work`.
    pub eb_residual: f64,
    /// Smallest growth margin of the sampled stability check (NaN if skipped).
    pub gs_margin: f64,
    /// Size of the debonded set as an equivalent front position.
    pub front: f64,
    /// Accumulated lower work bound `sum E(t_k, A_k) - E(t_{k-1}, A_k)`.
    pub work_lower: f64,
    /// Accumulated upper work bound `sum AC(h_{A_{k-1}}, A_{k-1})(t_k) - E(t_{k-1}, A_{k-1})`.
    pub work_upper: f64,
    /// False once an interval with an undefined power has been skipped.
    pub certified: bool,
}

#[derive(Debug, Clone)]
pub struct EvolutionTrace {
    pub grid: Arc<Grid>,
    pub kappa: ToughnessField,
    pub a0: RegionMask,
    pub drive: BoundaryDrive,
    pub steps: usize,
    pub options: EvolutionOptions,
    pub times: Vec<f64>,
    pub fields: Vec<ScalarField>,
    pub sets: Vec<RegionMask>,
    /// Positivity sets `{u_i > delta_pos}` as produced by the minimiser.
    pub positivity: Vec<RegionMask>,
    pub ledger: Vec<EnergyLedger>,
    /// `AC(u_i, A_{i-1})` for `i >= 1`; the initial entry is the elastic energy.
    pub ac_values: Vec<f64>,
    /// Power at both ends of interval `i` (index `i - 1`).
    pub power: Vec<PowerInterval>,
    pub stability: Vec<Option<StabilityReport>>,
    pub warnings: Vec<String>,
}

/// A run that stopped early; the trace holds every completed step.
#[derive(Debug, Clone, thiserror::Error)]
#[error("{error}")]
pub struct PartialRun {
    pub trace: Option<Box<EvolutionTrace>>,
    pub error: EvolutionError,
}

impl EvolutionTrace {
    pub fn len(&self) -> usize {
        self.fields.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fields.is_empty()
    }

    pub fn tau(&self) -> f64 {
        (self.drive.end() - self.drive.start()) / self.steps as f64
    }

    pub fn time(&self, i: usize) -> f64 {
        time_node(&self.drive, self.steps, i)
    }

    pub fn is_complete(&self) -> bool {
        self.len() == self.steps + 1
    }

    pub fn last(&self) -> &EnergyLedger {
        self.ledger.last().expect("trace has the initial state")
    }

    /// Largest `|eb_residual|` over the trace.
    pub fn max_abs_residual(&self) -> f64 {
        self.ledger.iter().map(|l| l.eb_residual.abs()).fold(0.0, f64::max)
    }

    pub fn fronts(&self) -> Vec<f64> {
        self.ledger.iter().map(|l| l.front).collect()
    }

    pub fn delta_pos(&self, i: usize) -> f64 {
        let w = self.drive.gamma_at(self.times[i]);
        self.options.tolerances.delta_pos(w.iter().copied().fold(0.0, f64::max))
    }
}

fn time_node(drive: &BoundaryDrive, steps: usize, i: usize) -> f64 {
    let (t0, t1) = (drive.start(), drive.end());
    if i == steps {
        t1
    } else {
        t0 + (t1 - t0) * i as f64 / steps as f64
    }
}

/// Equivalent front position of a debonded set: its node count turned into a
/// length (interval), a column count (rectangle) or an area-equivalent
/// radius (annulus).
pub fn front_position(grid: &Grid, set: &RegionMask) -> f64 {
    let n = set.count() as f64;
    let dx = grid.spacing();
    match grid.shape() {
        DomainShape::Interval { length } => (n * dx).min(length),
        DomainShape::Rectangle { width, .. } => {
            let rows = grid.lattice_dims().1 as f64;
            (n / rows * dx).min(width)
        }
        DomainShape::Annulus { inner, outer } => {
            (inner * inner + n * dx * dx / std::f64::consts::PI).sqrt().min(outer)
        }
    }
}

/// State at `t_0`: `u_0 = h_{A_0, w(0)}`.
pub fn init_evolution(
    grid: &Arc<Grid>,
    kappa: &ToughnessField,
    a0: &RegionMask,
    drive: &BoundaryDrive,
    steps: usize,
    options: &EvolutionOptions,
) -> Result<EvolutionTrace, EvolutionError> {
    if steps == 0 {
        return Err(EvolutionError::NoSteps);
    }
    if kappa.len() != grid.len() || a0.bits().len() != grid.len() || drive.grid().len() != grid.len() {
        return Err(crate::error::DomainError::GridMismatch.into());
    }
    let tol = options.tolerances;
    let t0 = drive.start();
    let w0 = drive.gamma_at(t0);
    let sol = solve_dirichlet_with(grid, a0, &w0, &DirichletOptions { tolerances: tol, initial: None })
        .map_err(EvolutionError::Init)?;
    let dpos = tol.delta_pos(w0.iter().copied().fold(0.0, f64::max));
    let pos = sol.field.positivity(dpos);
    let set = a0.union(&pos)?;
    let mut warnings = Vec::new();
    let stability = if options.check_initial_stability {
        let rep = stability_check(&sol.field, &set, kappa, &w0, &options.competitors, &tol);
        if !rep.passed {
            warnings.push(format!(
                "initial state is not stable: growth margin {:.3e} below -{:.1e}",
                rep.min_growth_margin, rep.tolerance
            ));
        }
        Some(rep)
    } else {
        None
    };
    let elastic = sol.energy;
    let ledger = EnergyLedger {
        step: 0,
        t: t0,
        elastic,
        dissipated: kappa.integral(grid, &set),
        work: 0.0,
        eb_residual: kappa.integral(grid, &set),
        gs_margin: stability.as_ref().map_or(f64::NAN, |r| r.min_growth_margin),
        front: front_position(grid, &set),
        work_lower: 0.0,
        work_upper: 0.0,
        certified: true,
    };
    Ok(EvolutionTrace {
        grid: Arc::clone(grid),
        kappa: kappa.clone(),
        a0: a0.clone(),
        drive: drive.clone(),
        steps,
        options: options.clone(),
        times: vec![t0],
        fields: vec![sol.field],
        sets: vec![set],
        positivity: vec![pos],
        ledger: vec![ledger],
        ac_values: vec![elastic],
        power: Vec::new(),
        stability: vec![stability],
        warnings,
    })
}

/// Advance the trace from step `i - 1` to step `i`.
pub fn mm_step(trace: &mut EvolutionTrace, i: usize) -> Result<(), EvolutionError> {
    if i == 0 || i != trace.len() || i > trace.steps {
        return Err(EvolutionError::OutOfOrder(i));
    }
    let grid = Arc::clone(&trace.grid);
    let tol = trace.options.tolerances;
    let t_prev = trace.times[i - 1];
    let t = trace.time(i);
    let w = trace.drive.gamma_at(t);
    let w_prev = trace.drive.gamma_at(t_prev);
    let prev_set = trace.sets[i - 1].clone();
    let prev_field = trace.fields[i - 1].clone();
    let opts = trace.options.ac.options(tol, Some(&prev_field));
    let ac = minimize_ac_with(&grid, &prev_set, &trace.kappa, &w, &opts)
        .map_err(|source| EvolutionError::Step { step: i, source })?;
    let set = prev_set.union(&ac.positivity)?;
    let field = ac.field;
    let elastic = field.dirichlet_energy();
    let dissipated = trace.kappa.integral(&grid, &set);

    // Power at both ends of the interval, and the one-sided work bounds.
    let rate = trace.drive.rate_between(t_prev, t);
    let dopts = DirichletOptions { tolerances: tol, initial: None };
    let dpos = tol.delta_pos(w.iter().copied().fold(0.0, f64::max));
    let kappa = &trace.kappa;
    let ((power, lower), upper) = rayon::join(
        || {
            rayon::join(
                || interval_power(trace, i, &prev_field, &prev_set, &field, &set, &rate, t_prev, t),
                || {
                    // E(t_i, A_i) - E(t_{i-1}, A_i)
                    solve_dirichlet_with(&grid, &set, &w_prev, &dopts).map(|h| elastic - h.energy)
                },
            )
        },
        || {
            // AC(h_{A_{i-1} + boundary}, A_{i-1}) at t_i minus E(t_{i-1}, A_{i-1})
            let mut base = prev_set.clone();
            for (slot, &g) in grid.gamma_nodes().iter().enumerate() {
                if w[slot] > dpos {
                    base.set(g, true);
                }
            }
            solve_dirichlet_with(&grid, &base, &w, &dopts)
                .map(|h| ac_value_with(&h.field, &prev_set, kappa, dpos) - trace.ledger[i - 1].elastic)
        },
    );
    let power = power.map_err(|source| EvolutionError::Power { step: i, source })?;
    let lower = lower.map_err(|source| EvolutionError::Power { step: i, source })?;
    let upper = upper.map_err(|source: SolveError| EvolutionError::Power { step: i, source })?;

    let prev = trace.ledger[i - 1];
    let (work, certified) = match power.trapezoid(t - t_prev) {
        Some(dw) => (prev.work + dw, prev.certified),
        None => (prev.work, false),
    };
    let elastic0 = trace.ledger[0].elastic;
    let stability = if trace.options.stability_every > 0 && i % trace.options.stability_every == 0 {
        Some(stability_check(&field, &set, &trace.kappa, &w, &trace.options.competitors, &tol))
    } else {
        None
    };
    let ledger = EnergyLedger {
        step: i,
        t,
        elastic,
        dissipated,
        work,
        eb_residual: elastic + dissipated - elastic0 - work,
        gs_margin: stability.as_ref().map_or(f64::NAN, |r| r.min_growth_margin),
        front: front_position(&grid, &set),
        work_lower: prev.work_lower + lower,
        work_upper: prev.work_upper + upper,
        certified,
    };
    if !ac.converged {
        trace.warnings.push(format!("step {i}: continuation did not converge; best iterate kept"));
    }
    trace.times.push(t);
    trace.fields.push(field);
    trace.sets.push(set);
    trace.positivity.push(ac.positivity);
    trace.ledger.push(ledger);
    trace.ac_values.push(ac.ac_value);
    trace.power.push(power);
    trace.stability.push(stability);
    Ok(())
}

/// Full run with `steps` uniform steps over the time span of the drive.
pub fn mm_run(
    grid: &Arc<Grid>,
    kappa: &ToughnessField,
    a0: &RegionMask,
    drive: &BoundaryDrive,
    steps: usize,
    options: &EvolutionOptions,
) -> Result<EvolutionTrace, PartialRun> {
    let mut trace = init_evolution(grid, kappa, a0, drive, steps, options)
        .map_err(|error| PartialRun { trace: None, error })?;
    for i in 1..=steps {
        if let Err(error) = mm_step(&mut trace, i) {
            return Err(PartialRun { trace: Some(Box::new(trace)), error });
        }
    }
    Ok(trace)
}

/// One row of a step-refinement study.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefinementRow {
    pub steps: usize,
    pub tau: f64,
    pub final_elastic: f64,
    pub final_dissipated: f64,
    pub max_abs_residual: f64,
    pub final_front: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub rows: Vec<RefinementRow>,
    /// Ratio of consecutive maximal residuals (coarse over fine).
    pub ratios: Vec<f64>,
    /// Maximal residual strictly decreases with the step count (or is zero
    /// throughout).
    pub residual_decreasing: bool,
}

/// Runs the same physics with each step count (in parallel).
pub fn refine_study(
    grid: &Arc<Grid>,
    kappa: &ToughnessField,
    a0: &RegionMask,
    drive: &BoundaryDrive,
    step_counts: &[usize],
    options: &EvolutionOptions,
) -> Result<ConvergenceTable, PartialRun> {
    if step_counts.len() < 2 {
        return Err(PartialRun {
            trace: None,
            error: EvolutionError::Domain(crate::error::DomainError::InvalidDrive(
                "a refinement study needs at least two step counts".into(),
            )),
        });
    }
    let mut counts = step_counts.to_vec();
    counts.sort_unstable();
    let rows = counts
        .par_iter()
        .map(|&j| {
            let tr = mm_run(grid, kappa, a0, drive, j, options)?;
            let last = tr.last();
            Ok(RefinementRow {
                steps: j,
                tau: tr.tau(),
                final_elastic: last.elastic,
                final_dissipated: last.dissipated,
                max_abs_residual: tr.max_abs_residual(),
                final_front: last.front,
            })
        })
        .collect::<Result<Vec<_>, PartialRun>>()?;
    let ratios: Vec<f64> = rows.windows(2).map(|p| p[0].max_abs_residual / p[1].max_abs_residual).collect();
    let scale = rows.iter().map(|r| r.final_elastic + r.final_dissipated).fold(1.0, f64::max);
    let all_zero = rows.iter().all(|r| r.max_abs_residual <= 1e-9 * scale);
    let residual_decreasing = all_zero || rows.windows(2).all(|p| p[1].max_abs_residual < p[0].max_abs_residual);
    Ok(ConvergenceTable { rows, ratios, residual_decreasing })
}

#[cfg(test)]
mod tests;
