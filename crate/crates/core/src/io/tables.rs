//! CSV tables. Floats are written in shortest round-trip form, so reading a
//! table back reproduces every value bit for bit.

use std::path::Path;
use std::sync::Arc;

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use crate::audit::AuditRow;
use crate::bernoulli::StabilityReport;
use crate::domain::Grid;
use crate::error::IoError;
use crate::evolution::{ConvergenceTable, EnergyLedger};
use crate::field::ScalarField;
use crate::onedim::EbSample;

/// Column order of the ledger table.
pub const LEDGER_COLUMNS: [&str; 8] = ["i", "t", "elastic", "dissipated", "work", "eb_residual", "gs_margin", "front_stat"];

/// One ledger line. `gs_margin` is NaN on steps without a stability check;
/// `front_stat` is the equivalent front position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub i: usize,
    pub t: f64,
    pub elastic: f64,
    pub dissipated: f64,
    pub work: f64,
    pub eb_residual: f64,
    pub gs_margin: f64,
    pub front_stat: f64,
}

impl From<&EnergyLedger> for LedgerRow {
    fn from(l: &EnergyLedger) -> Self {
        LedgerRow {
            i: l.step,
            t: l.t,
            elastic: l.elastic,
            dissipated: l.dissipated,
            work: l.work,
            eb_residual: l.eb_residual,
            gs_margin: l.gs_margin,
            front_stat: l.front,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct FieldRow {
    node: usize,
    x: f64,
    y: f64,
    value: f64,
}

#[derive(Serialize)]
struct StabilityRow {
    step: usize,
    id: usize,
    kind: &'static str,
    margin: f64,
    pass: Option<bool>,
}

#[derive(Serialize)]
struct ConvergenceRow {
    steps: usize,
    tau: f64,
    final_elastic: f64,
    final_dissipated: f64,
    max_abs_residual: f64,
    final_front: f64,
    ratio: Option<f64>,
}

fn io_err(path: &Path, source: std::io::Error) -> IoError {
    IoError::Io { path: path.display().to_string(), source }
}

fn csv_err(e: csv::Error) -> IoError {
    IoError::Format { format: "csv", message: e.to_string() }
}

fn write_rows<T: Serialize>(path: &Path, rows: impl IntoIterator<Item = T>) -> Result<(), IoError> {
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut w = csv::Writer::from_writer(std::io::BufWriter::new(file));
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn read_rows<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, IoError> {
    let file = std::fs::File::open(path).map_err(|e| io_err(path, e))?;
    csv::Reader::from_reader(std::io::BufReader::new(file))
        .deserialize()
        .collect::<Result<Vec<T>, _>>()
        .map_err(csv_err)
}

pub fn write_ledger_csv(path: &Path, ledger: &[EnergyLedger]) -> Result<(), IoError> {
    write_rows(path, ledger.iter().map(LedgerRow::from))
}

pub fn read_ledger_csv(path: &Path) -> Result<Vec<LedgerRow>, IoError> {
    read_rows(path)
}

pub fn write_field_csv(path: &Path, field: &ScalarField) -> Result<(), IoError> {
    let grid = field.grid();
    write_rows(
        path,
        field.values().iter().enumerate().map(|(node, &value)| {
            let [x, y] = grid.coord(node);
            FieldRow { node, x, y, value }
        }),
    )
}

/// Reads a field written by [`write_field_csv`]; every node must appear once.
pub fn read_field_csv(path: &Path, grid: &Arc<Grid>) -> Result<ScalarField, IoError> {
    let rows: Vec<FieldRow> = read_rows(path)?;
    let mut values = vec![f64::NAN; grid.len()];
    let mut seen = vec![false; grid.len()];
    for r in &rows {
        if r.node >= grid.len() || seen[r.node] {
            return Err(IoError::Format { format: "csv", message: format!("node {} is out of range or repeated", r.node) });
        }
        seen[r.node] = true;
        values[r.node] = r.value;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(IoError::Format { format: "csv", message: format!("node {missing} is missing") });
    }
    Ok(ScalarField::new(grid, values)?)
}

pub fn write_audit_csv(path: &Path, rows: &[AuditRow]) -> Result<(), IoError> {
    write_rows(path, rows)
}

pub fn write_stability_csv(path: &Path, reports: &[Option<StabilityReport>]) -> Result<(), IoError> {
    let rows = reports.iter().enumerate().flat_map(|(step, r)| {
        r.iter().flat_map(move |r| {
            r.competitors.iter().map(move |c| StabilityRow { step, id: c.id, kind: c.kind.name(), margin: c.margin, pass: c.pass })
        })
    });
    write_rows(path, rows)
}

pub fn write_trajectory_csv(path: &Path, samples: &[EbSample]) -> Result<(), IoError> {
    write_rows(path, samples)
}

pub fn write_convergence_csv(path: &Path, table: &ConvergenceTable) -> Result<(), IoError> {
    write_rows(
        path,
        table.rows.iter().enumerate().map(|(k, r)| ConvergenceRow {
            steps: r.steps,
            tau: r.tau,
            final_elastic: r.final_elastic,
            final_dissipated: r.final_dissipated,
            max_abs_residual: r.max_abs_residual,
            final_front: r.final_front,
            ratio: k.checked_sub(1).map(|j| table.ratios[j]),
        }),
    )
}
