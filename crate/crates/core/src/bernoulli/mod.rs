//! Minimisation of the Alt-Caffarelli functional
//! `AC(v, A) = 1/2 integral |grad v|^2 + integral_{ {v > 0} \ A } kappa`
//! over fields carrying the boundary datum on the Dirichlet nodes.

mod continuation;
mod stability;

use std::sync::Arc;

use rayon::prelude::*;

use crate::dirichlet::{solve_dirichlet_with, DirichletOptions};
use crate::domain::{Grid, RegionMask, ToughnessField};
use crate::error::{AcError, DomainError};
use crate::field::ScalarField;
use crate::tolerance::Tolerances;

pub use stability::{stability_check, Competitor, CompetitorFamily, CompetitorKind, StabilityReport};

/// Grids up to this many nodes are relaxed without a window.
const FULL_WINDOW_NODES: usize = 20_000;

#[derive(Debug, Clone)]
pub struct ACResult {
    /// The minimiser, harmonic on its positivity set.
    pub field: ScalarField,
    /// `{field > delta_pos}`.
    pub positivity: RegionMask,
    pub ac_value: f64,
    pub converged: bool,
    /// `(eps, incumbent value)` after each smoothing level.
    pub continuation_trace: Vec<(f64, f64)>,
    /// Which candidate produced the result.
    pub origin: CandidateOrigin,
    pub linear_solves: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CandidateOrigin {
    /// Dirichlet solution on the constraint set.
    Constraint,
    FullDebond,
    WarmStart,
    /// Constraint set grown by whole lattice layers.
    DilationScan,
    Continuation,
    Polish,
}

#[derive(Debug, Clone)]
pub struct AcOptions<'a> {
    pub tolerances: Tolerances,
    /// Previous field, used to seed the continuation and as a competitor.
    pub warm_start: Option<&'a ScalarField>,
    pub levels: usize,
    pub max_active_set_iterations: usize,
    /// Thickest shell tried by the set-space polish, in grid layers.
    pub polish_shells: usize,
    pub max_polish_rounds: usize,
    /// Initial window margin (in grid layers) around the constraint set on
    /// large grids.
    pub window_layers: usize,
    /// The polish also tries single-node flips on the frontier when it has at
    /// most this many nodes.
    pub single_flip_limit: usize,
    /// On small grids, the constraint set grown by 1, 2, ... up to this many
    /// lattice layers is evaluated too. This reaches minima that local moves
    /// cannot when the toughness has barriers.
    pub dilation_scan: usize,
}

impl Default for AcOptions<'_> {
    fn default() -> Self {
        AcOptions {
            tolerances: Tolerances::default(),
            warm_start: None,
            levels: 12,
            max_active_set_iterations: 3,
            polish_shells: 3,
            max_polish_rounds: 400,
            window_layers: 12,
            single_flip_limit: 64,
            dilation_scan: 32,
        }
    }
}

/// `AC(field, a)` with the positivity threshold tied to the boundary values.
pub fn ac_value(field: &ScalarField, a: &RegionMask, kappa: &ToughnessField) -> f64 {
    let dpos = Tolerances::default().delta_pos(max_gamma(field));
    ac_value_with(field, a, kappa, dpos)
}

pub(crate) fn ac_value_with(field: &ScalarField, a: &RegionMask, kappa: &ToughnessField, dpos: f64) -> f64 {
    let grid = field.grid();
    let penalty: f64 = field
        .values()
        .iter()
        .enumerate()
        .filter(|&(p, &v)| v > dpos && !a.contains(p))
        .map(|(p, _)| kappa.value(p) * grid.volume(p))
        .sum();
    field.dirichlet_energy() + penalty
}

fn max_gamma(field: &ScalarField) -> f64 {
    field.gamma_values().iter().copied().fold(0.0, f64::max)
}

struct Evaluator<'a> {
    grid: &'a Arc<Grid>,
    a: &'a RegionMask,
    kappa: &'a ToughnessField,
    w: &'a [f64],
    tol: Tolerances,
    dpos: f64,
}

struct Candidate {
    set: RegionMask,
    field: ScalarField,
    value: f64,
    origin: CandidateOrigin,
}

impl Evaluator<'_> {
    fn eval(&self, set: RegionMask, origin: CandidateOrigin, initial: Option<&ScalarField>) -> Result<Candidate, AcError> {
        let opts = DirichletOptions { tolerances: self.tol, initial };
        let sol = solve_dirichlet_with(self.grid, &set, self.w, &opts)?;
        let value = ac_value_with(&sol.field, self.a, self.kappa, self.dpos);
        Ok(Candidate { set, field: sol.field, value, origin })
    }
}

pub fn minimize_ac(
    grid: &Arc<Grid>,
    a: &RegionMask,
    kappa: &ToughnessField,
    w_t: &[f64],
) -> Result<ACResult, AcError> {
    minimize_ac_with(grid, a, kappa, w_t, &AcOptions::default())
}

pub fn minimize_ac_with(
    grid: &Arc<Grid>,
    a: &RegionMask,
    kappa: &ToughnessField,
    w_t: &[f64],
    opts: &AcOptions<'_>,
) -> Result<ACResult, AcError> {
    if w_t.len() != grid.gamma_count() {
        return Err(DomainError::LengthMismatch { expected: grid.gamma_count(), got: w_t.len() }.into());
    }
    if a.bits().len() != grid.len() || kappa.len() != grid.len() {
        return Err(DomainError::GridMismatch.into());
    }
    for (slot, &v) in w_t.iter().enumerate() {
        if !v.is_finite() {
            return Err(DomainError::NonFinite { node: grid.gamma_nodes()[slot] }.into());
        }
        if v < 0.0 {
            return Err(AcError::NegativeBoundaryDatum { node: grid.gamma_nodes()[slot], value: v });
        }
    }
    let tol = opts.tolerances;
    let max_w = w_t.iter().copied().fold(0.0, f64::max);
    let dpos = tol.delta_pos(max_w);
    let ev = Evaluator { grid, a, kappa, w: w_t, tol, dpos };
    let mut solves = 0;

    // Every admissible field is positive on these boundary nodes.
    let mut base = a.clone();
    for (slot, &g) in grid.gamma_nodes().iter().enumerate() {
        if w_t[slot] > dpos {
            base.set(g, true);
        }
    }

    let warm_set = opts.warm_start.map(|f| base.union(&f.positivity(dpos))).transpose()?;
    let mut seeds = vec![(base.clone(), CandidateOrigin::Constraint), (RegionMask::full(grid), CandidateOrigin::FullDebond)];
    if let Some(ws) = warm_set.filter(|ws| *ws != base) {
        seeds.push((ws, CandidateOrigin::WarmStart));
    }
    if grid.len() <= FULL_WINDOW_NODES {
        let mut last = base.clone();
        for k in 1..=opts.dilation_scan {
            let shell = base.dilate(k as f64 * grid.spacing());
            if shell == last {
                break;
            }
            last = shell.clone();
            seeds.push((shell, CandidateOrigin::DilationScan));
        }
    }
    let evaluated: Vec<Result<Candidate, AcError>> =
        seeds.into_par_iter().map(|(set, origin)| ev.eval(set, origin, opts.warm_start)).collect();
    solves += evaluated.len();
    let mut candidates = evaluated.into_iter().collect::<Result<Vec<_>, _>>()?;

    // Smoothed continuation, seeded from the warm start or the constraint solution.
    let start = opts.warm_start.cloned().unwrap_or_else(|| candidates[0].field.clone());
    let (cont, trace, cont_solves, converged) = run_continuation(&ev, &base, start, opts, &candidates);
    solves += cont_solves;
    candidates.push(cont);
    solves += 1;

    let mut best = candidates
        .into_iter()
        .min_by(|x, y| x.value.partial_cmp(&y.value).unwrap())
        .expect("at least one candidate");

    let polish_solves;
    (best, polish_solves) = polish(&ev, &base, best, opts)?;
    solves += polish_solves;

    let positivity = best.field.positivity(dpos);
    Ok(ACResult {
        field: best.field,
        positivity,
        ac_value: best.value,
        converged,
        continuation_trace: trace,
        origin: best.origin,
        linear_solves: solves,
    })
}

fn run_continuation(
    ev: &Evaluator<'_>,
    base: &RegionMask,
    start: ScalarField,
    opts: &AcOptions<'_>,
    seeds: &[Candidate],
) -> (Candidate, Vec<(f64, f64)>, usize, bool) {
    let grid = ev.grid;
    let n = grid.len();
    let cost: Vec<f64> = (0..n)
        .map(|p| if ev.a.contains(p) { 0.0 } else { ev.kappa.value(p) * grid.volume(p) })
        .collect();
    let eps0 = ev.w.iter().copied().fold(0.0, f64::max);
    let mut incumbent = seeds.iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    let mut trace = Vec::with_capacity(opts.levels);
    let mut solves = 0;

    let mut layers = opts.window_layers.max(1);
    let mut v = start.into_values();
    for (slot, &g) in grid.gamma_nodes().iter().enumerate() {
        v[g] = ev.w[slot];
    }
    let v_start = v.clone();
    let mut converged = true;
    if eps0 <= 0.0 {
        let zero = ScalarField::zeros(grid);
        let c = ev.eval(base.clone(), CandidateOrigin::Continuation, Some(&zero));
        return (c.unwrap_or_else(|_| clone_candidate(&seeds[0])), trace, 1, true);
    }
    loop {
        let window = if n <= FULL_WINDOW_NODES {
            RegionMask::full(grid)
        } else {
            let seed = base.union(&start_support(grid, &v_start, ev.dpos)).unwrap_or_else(|_| base.clone());
            seed.dilate(layers as f64 * grid.spacing())
        };
        let eligible: Vec<bool> = (0..n).map(|p| window.contains(p) && !grid.is_gamma(p)).collect();
        let problem = continuation::Problem {
            grid,
            eligible: &eligible,
            cost: &cost,
            cg_tol: ev.tol.cg_relative.max(1e-6),
            max_active_set_iterations: opts.max_active_set_iterations,
        };
        v.clone_from(&v_start);
        for p in 0..n {
            if !window.contains(p) {
                v[p] = 0.0;
            }
        }
        trace.clear();
        let mut eps = eps0;
        for _ in 0..opts.levels {
            let (_, s) = problem.relax(&mut v, eps);
            solves += s;
            let f = ScalarField::new(grid, v.clone()).expect("finite relaxation");
            incumbent = incumbent.min(ac_value_with(&f, ev.a, ev.kappa, ev.dpos));
            trace.push((eps, incumbent));
            eps *= 0.5;
        }
        // Grow the window when the relaxed support reaches its edge.
        let touches = window.inner_frontier().iter().any(|p| v[p] > ev.dpos && !grid.is_gamma(p));
        if n <= FULL_WINDOW_NODES || !touches || window.count() == n {
            break;
        }
        layers *= 2;
        if layers > 4096 {
            converged = false;
            break;
        }
    }
    let field = ScalarField::new(grid, v).expect("finite relaxation");
    let set = base.union(&field.positivity(ev.dpos)).unwrap_or_else(|_| base.clone());
    match ev.eval(set, CandidateOrigin::Continuation, Some(&field)) {
        Ok(c) => {
            if let Some(last) = trace.last_mut() {
                last.1 = last.1.min(c.value);
            }
            (c, trace, solves, converged)
        }
        Err(_) => (clone_candidate(&seeds[0]), trace, solves, false),
    }
}

fn start_support(grid: &Arc<Grid>, v: &[f64], dpos: f64) -> RegionMask {
    RegionMask::from_fn(grid, |p| v[p] > dpos)
}

fn clone_candidate(c: &Candidate) -> Candidate {
    Candidate { set: c.set.clone(), field: c.field.clone(), value: c.value, origin: c.origin }
}

/// Set-space local search: grow by whole shells or retract one layer of the
/// newly debonded part while the functional decreases.
fn polish(ev: &Evaluator<'_>, base: &RegionMask, mut best: Candidate, opts: &AcOptions<'_>) -> Result<(Candidate, usize), AcError> {
    let grid = ev.grid;
    let mut solves = 0;
    // Work with the set actually charged: the constraint set plus positivity.
    let tight = base.union(&best.field.positivity(ev.dpos))?;
    if tight != best.set {
        best.set = tight;
    }
    for _ in 0..opts.max_polish_rounds {
        let mut moves = Vec::new();
        for k in 1..=opts.polish_shells {
            let grown = best.set.dilate(k as f64 * grid.spacing());
            if grown != best.set {
                moves.push(grown);
            }
        }
        let retract = {
            let mut s = best.set.clone();
            for p in best.set.inner_frontier().iter() {
                if !base.contains(p) {
                    s.set(p, false);
                }
            }
            s
        };
        if retract != best.set {
            moves.push(retract);
        }
        let outer = best.set.outer_frontier();
        let inner: Vec<usize> = best.set.inner_frontier().iter().filter(|&p| !base.contains(p)).collect();
        if outer.count() + inner.len() <= opts.single_flip_limit {
            for p in outer.iter() {
                let mut s = best.set.clone();
                s.set(p, true);
                moves.push(s);
            }
            for &p in &inner {
                let mut s = best.set.clone();
                s.set(p, false);
                moves.push(s);
            }
        }
        if moves.is_empty() {
            break;
        }
        let init = best.field.clone();
        let results: Vec<Result<Candidate, AcError>> = moves
            .into_par_iter()
            .map(|set| ev.eval(set, CandidateOrigin::Polish, Some(&init)))
            .collect();
        solves += results.len();
        let mut improved = false;
        for r in results {
            let c = r?;
            if c.value < best.value - 1e-14 * (1.0 + best.value.abs()) {
                best = c;
                improved = true;
            }
        }
        if !improved {
            break;
        }
        best.set = base.union(&best.field.positivity(ev.dpos))?;
    }
    Ok((best, solves))
}

#[cfg(test)]
mod tests;
