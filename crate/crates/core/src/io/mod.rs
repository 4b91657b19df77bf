//! Run configuration and serialization of traces, masks and fields.

mod heatmap;
mod pgm;
mod tables;

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::audit::AuditOptions;
use crate::bernoulli::CompetitorFamily;
use crate::domain::{fatten_initial_set, BoundaryDrive, Grid, GridSpec, RegionMask, TimeSeries, ToughnessField};
use crate::error::IoError;
use crate::evolution::{AcSettings, EvolutionOptions};
use crate::tolerance::Tolerances;

pub use heatmap::write_heatmap;
pub use pgm::{read_mask_pgm, write_mask_pgm, mask_from_pgm, mask_to_pgm};
pub use tables::{
    read_field_csv, read_ledger_csv, write_audit_csv, write_convergence_csv, write_field_csv, write_ledger_csv,
    write_stability_csv, write_trajectory_csv, LedgerRow, LEDGER_COLUMNS,
};

/// Toughness specification.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum KappaSpec {
    Constant { value: f64 },
    /// `c / x^2`, with `x` clamped to `[start, alpha]` (`alpha` optional).
    InverseSquare { c: f64, start: f64, alpha: Option<f64> },
    /// Piecewise constant in the distance to the origin: `values[k]` on the
    /// `k`-th band delimited by the increasing `radii`.
    Radial { radii: Vec<f64>, values: Vec<f64> },
    /// Per-node values from a field CSV (`node,x,y,value`).
    Raster { path: PathBuf },
}

/// Initial debonded set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSetSpec {
    Empty,
    /// `x < length`.
    Interval { length: f64 },
    /// `inner <= |x| < radius` (`inner` defaults to 0).
    Disk { radius: f64, inner: Option<f64> },
    /// PGM mask file.
    Mask { path: PathBuf },
}

/// Boundary displacement samples, linearly interpolated in time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSpec {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Per boundary node multiplier (in boundary order); uniform when absent.
    pub profile: Option<Vec<f64>>,
    /// Attach the cutoff extension of the drive into the initial set.
    #[serde(default)]
    pub extension: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsSection {
    pub kappa: KappaSpec,
    pub a0: InitialSetSpec,
    /// Add every node within this distance of the Dirichlet boundary to `a0`.
    #[serde(default)]
    pub fatten: f64,
    pub drive: DriveSpec,
    /// Declared bound `M` on the drive; checked when present.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeSection {
    pub steps: usize,
    /// Step counts of a refinement sweep; defaults to `steps/4, steps/2, steps`.
    pub sweep: Vec<usize>,
    pub seed: u64,
    pub stability_every: usize,
    pub check_initial_stability: bool,
    pub tolerances: Tolerances,
    pub ac: AcSettings,
    pub competitors: CompetitorFamily,
    pub audit: AuditOptions,
}

impl Default for SchemeSection {
    fn default() -> Self {
        let e = EvolutionOptions::default();
        SchemeSection {
            steps: 100,
            sweep: Vec::new(),
            seed: e.competitors.seed,
            stability_every: e.stability_every,
            check_initial_stability: e.check_initial_stability,
            tolerances: e.tolerances,
            ac: e.ac,
            competitors: e.competitors,
            audit: AuditOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Pgm,
    Png,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Dump fields and masks every this many steps (0: final state only).
    pub dump_every: usize,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection { dir: PathBuf::from("out"), dump_every: 0, formats: vec![OutputFormat::Csv, OutputFormat::Pgm] }
    }
}

/// A complete run description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub domain: GridSpec,
    pub physics: PhysicsSection,
    #[serde(default)]
    pub scheme: SchemeSection,
    #[serde(default)]
    pub output: OutputSection,
    /// Directory that relative paths are resolved against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

/// Everything a run needs, built from a [`RunConfig`].
#[derive(Debug, Clone)]
pub struct Problem {
    pub grid: Arc<Grid>,
    pub kappa: ToughnessField,
    pub a0: RegionMask,
    pub drive: BoundaryDrive,
    pub steps: usize,
    pub options: EvolutionOptions,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, IoError> {
        toml::from_str(text).map_err(|e| IoError::Parse(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(path).map_err(|source| IoError::Io { path: path.display().to_string(), source })?;
        let mut cfg = Self::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config is serializable")
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn evolution_options(&self) -> EvolutionOptions {
        let s = &self.scheme;
        let mut competitors = s.competitors.clone();
        competitors.seed = s.seed;
        EvolutionOptions {
            tolerances: s.tolerances,
            ac: s.ac.clone(),
            competitors,
            stability_every: s.stability_every,
            check_initial_stability: s.check_initial_stability,
        }
    }

    /// Step counts of a refinement sweep.
    pub fn sweep_counts(&self) -> Vec<usize> {
        if !self.scheme.sweep.is_empty() {
            return self.scheme.sweep.clone();
        }
        let j = self.scheme.steps;
        let mut v: Vec<usize> = [j / 4, j / 2, j].into_iter().filter(|&k| k > 0).collect();
        v.dedup();
        v
    }

    pub fn build(&self) -> Result<Problem, IoError> {
        if self.scheme.steps == 0 {
            return Err(IoError::Invalid("scheme.steps must be positive".into()));
        }
        let grid = Arc::new(Grid::build(&self.domain)?);
        let a0 = self.initial_set(&grid)?;
        let kappa = self.toughness(&grid, &a0)?;
        let drive = self.drive(&grid, &a0)?;
        if let Some(m) = self.physics.bound {
            if drive.bound() > m {
                return Err(IoError::Invalid(format!("drive reaches {} above the declared bound {m}", drive.bound())));
            }
        }
        Ok(Problem { grid, kappa, a0, drive, steps: self.scheme.steps, options: self.evolution_options() })
    }

    fn initial_set(&self, grid: &Arc<Grid>) -> Result<RegionMask, IoError> {
        let a0 = match &self.physics.a0 {
            InitialSetSpec::Empty => RegionMask::empty(grid),
            InitialSetSpec::Interval { length } => RegionMask::from_coords(grid, |x, _| x < length - 1e-9 * grid.spacing()),
            InitialSetSpec::Disk { radius, inner } => {
                let lo = inner.unwrap_or(0.0);
                RegionMask::from_coords(grid, |x, y| {
                    let r = x.hypot(y);
                    r >= lo && r < *radius
                })
            }
            InitialSetSpec::Mask { path } => read_mask_pgm(&self.resolve(path), grid)?,
        };
        Ok(fatten_initial_set(grid, &a0, self.physics.fatten))
    }

    fn toughness(&self, grid: &Arc<Grid>, a0: &RegionMask) -> Result<ToughnessField, IoError> {
        let k = match &self.physics.kappa {
            KappaSpec::Constant { value } => ToughnessField::constant(grid, *value, a0)?,
            KappaSpec::InverseSquare { c, start, alpha } => {
                if !(*start > 0.0) || alpha.is_some_and(|a| a < *start) {
                    return Err(IoError::Invalid(format!("inverse_square needs 0 < start <= alpha, got {start}, {alpha:?}")));
                }
                let hi = alpha.unwrap_or(f64::INFINITY);
                ToughnessField::from_fn(grid, |x, _| c / x.clamp(*start, hi).powi(2), a0)?
            }
            KappaSpec::Radial { radii, values } => {
                if values.len() != radii.len() + 1 || radii.windows(2).any(|w| w[1] <= w[0]) {
                    return Err(IoError::Invalid(
                        "radial toughness needs increasing radii and one more value than radii".into(),
                    ));
                }
                ToughnessField::from_fn(grid, |x, y| values[radii.partition_point(|&r| r <= x.hypot(y))], a0)?
            }
            KappaSpec::Raster { path } => {
                let f = read_field_csv(&self.resolve(path), grid)?;
                ToughnessField::new(grid, f.into_values(), a0)?
            }
        };
        Ok(k)
    }

    fn drive(&self, grid: &Arc<Grid>, a0: &RegionMask) -> Result<BoundaryDrive, IoError> {
        let d = &self.physics.drive;
        let series = TimeSeries::new(d.times.clone(), d.values.clone())?;
        let drive = match &d.profile {
            None => BoundaryDrive::uniform(grid, &series)?,
            Some(p) => BoundaryDrive::separable(grid, &series, p)?,
        };
        Ok(if d.extension { drive.with_cutoff_extension(a0)? } else { drive })
    }
}

#[cfg(test)]
mod tests;
