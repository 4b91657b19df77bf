//! Sampled global-stability check: compare the energy of a state with the
//! energy plus debonding cost of competitor states.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ac_value_with;
use crate::dirichlet::{solve_dirichlet_with, DirichletOptions};
use crate::domain::{Grid, RegionMask, ToughnessField};
use crate::field::ScalarField;
use crate::tolerance::Tolerances;

/// Which competitors to sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompetitorFamily {
    /// Front dilations by `k * dx`, `k = 1..=dilations`.
    pub dilations: usize,
    /// Number of sampled bump centres on the outer frontier.
    pub bumps: usize,
    /// Bump radii in grid layers.
    pub bump_radii: Vec<f64>,
    pub full_debond: bool,
    /// Retractions by `k` layers of the debonded set (recorded only).
    pub retractions: usize,
    pub seed: u64,
}

impl Default for CompetitorFamily {
    fn default() -> Self {
        CompetitorFamily {
            dilations: 3,
            bumps: 6,
            bump_radii: vec![1.0, 3.0],
            full_debond: true,
            retractions: 1,
            seed: 0x5eed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompetitorKind {
    Dilation,
    Bump,
    FullDebond,
    Retraction,
}

impl CompetitorKind {
    /// Growth competitors are the ones stability constrains.
    pub fn is_growth(self) -> bool {
        !matches!(self, CompetitorKind::Retraction)
    }

    pub fn name(self) -> &'static str {
        match self {
            CompetitorKind::Dilation => "dilation",
            CompetitorKind::Bump => "bump",
            CompetitorKind::FullDebond => "full_debond",
            CompetitorKind::Retraction => "retraction",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Competitor {
    pub id: usize,
    pub kind: CompetitorKind,
    /// `AC(v, A_u) - 1/2 integral |grad u|^2`.
    pub margin: f64,
    /// `None` for competitors that are recorded but not judged, or whose
    /// Dirichlet problem has no admissible field.
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub competitors: Vec<Competitor>,
    pub energy: f64,
    pub tolerance: f64,
    /// Smallest margin over the growth competitors (`+inf` when none).
    pub min_growth_margin: f64,
    pub passed: bool,
}

impl StabilityReport {
    pub fn worst(&self) -> Option<&Competitor> {
        self.competitors
            .iter()
            .filter(|c| c.kind.is_growth())
            .min_by(|a, b| a.margin.partial_cmp(&b.margin).unwrap())
    }
}

fn bump(grid: &Arc<Grid>, centre: usize, radius_layers: f64) -> RegionMask {
    let mut single = RegionMask::empty(grid);
    single.set(centre, true);
    single.dilate(radius_layers * grid.spacing())
}

/// Sampled stability margins of `field` (which must vanish outside `a_u`).
pub fn stability_check(
    field: &ScalarField,
    a_u: &RegionMask,
    kappa: &ToughnessField,
    w_t: &[f64],
    family: &CompetitorFamily,
    tol: &Tolerances,
) -> StabilityReport {
    let grid = field.grid();
    let max_w = w_t.iter().copied().fold(0.0, f64::max);
    let dpos = tol.delta_pos(max_w);
    let energy = field.dirichlet_energy();
    let tolerance = tol.stability(energy);

    let mut sets: Vec<(CompetitorKind, RegionMask)> = Vec::new();
    for k in 1..=family.dilations {
        sets.push((CompetitorKind::Dilation, a_u.dilate(k as f64 * grid.spacing())));
    }
    let frontier: Vec<usize> = a_u.outer_frontier().iter().collect();
    if !frontier.is_empty() {
        let mut rng = ChaCha8Rng::seed_from_u64(family.seed);
        for _ in 0..family.bumps {
            let c = frontier[rng.gen_range(0..frontier.len())];
            for &r in &family.bump_radii {
                if let Ok(s) = a_u.union(&bump(grid, c, r)) {
                    sets.push((CompetitorKind::Bump, s));
                }
            }
        }
    }
    if family.full_debond {
        sets.push((CompetitorKind::FullDebond, RegionMask::full(grid)));
    }
    let mut shrunk = a_u.clone();
    for _ in 0..family.retractions {
        let mut next = shrunk.clone();
        for p in shrunk.inner_frontier().iter() {
            if !grid.is_gamma(p) {
                next.set(p, false);
            }
        }
        if next == shrunk {
            break;
        }
        sets.push((CompetitorKind::Retraction, next.clone()));
        shrunk = next;
    }

    let opts = DirichletOptions { tolerances: *tol, initial: Some(field) };
    let competitors: Vec<Competitor> = sets
        .into_par_iter()
        .enumerate()
        .map(|(id, (kind, set))| match solve_dirichlet_with(grid, &set, w_t, &opts) {
            Ok(sol) => {
                let margin = ac_value_with(&sol.field, a_u, kappa, dpos) - energy;
                let pass = kind.is_growth().then_some(margin >= -tolerance);
                Competitor { id, kind, margin, pass }
            }
            Err(_) => Competitor { id, kind, margin: f64::NAN, pass: None },
        })
        .collect();
    let min_growth_margin = competitors
        .iter()
        .filter(|c| c.kind.is_growth() && c.margin.is_finite())
        .map(|c| c.margin)
        .fold(f64::INFINITY, f64::min);
    let passed = competitors.iter().all(|c| c.pass != Some(false));
    StabilityReport { competitors, energy, tolerance, min_growth_margin, passed }
}
