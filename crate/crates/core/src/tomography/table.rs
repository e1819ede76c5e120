use std::collections::BTreeMap;
use std::io;

use serde::{Deserialize, Serialize};

use super::{CovarianceBlock, EstimationReport, MeasurementPlan, StabilizerEstimate, TomographyError};
use crate::pauli_core::{BinaryVector, PauliOperator};

/// Published six-qubit stabilizer values and their grouping into settings.
pub const C6_REFERENCE_CSV: &str = include_str!("../../fixtures/c6_stabilizers.csv");

/// One row of the stabilizer table: `input, stabilizer, raw, raw_stderr,
/// spam_corrected, spam_stderr, setting`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub input: BinaryVector,
    pub stabilizer: PauliOperator,
    pub raw: Option<f64>,
    pub raw_stderr: Option<f64>,
    pub spam_corrected: Option<f64>,
    pub spam_stderr: Option<f64>,
    pub setting: usize,
}

fn csv_err(e: csv::Error) -> TomographyError {
    TomographyError::Csv(e.to_string())
}

pub fn read_table_csv<R: io::Read>(reader: R) -> Result<Vec<TableRow>, TomographyError> {
    csv::Reader::from_reader(reader).deserialize().collect::<Result<_, _>>().map_err(csv_err)
}

pub fn write_table_csv<W: io::Write>(rows: &[TableRow], writer: W) -> Result<(), TomographyError> {
    let mut w = csv::Writer::from_writer(writer);
    if rows.is_empty() {
        w.write_record(["input", "stabilizer", "raw", "raw_stderr", "spam_corrected", "spam_stderr", "setting"])
            .map_err(csv_err)?;
    }
    for r in rows {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush().map_err(|e| TomographyError::Io(e.to_string()))
}

pub fn reference_table() -> Vec<TableRow> {
    read_table_csv(C6_REFERENCE_CSV.as_bytes()).expect("bundled fixture parses")
}

/// The plan whose cliques are the table's settings, in setting order.
pub fn plan_from_table(rows: &[TableRow]) -> Result<MeasurementPlan, TomographyError> {
    let mut groups: BTreeMap<usize, Vec<PauliOperator>> = BTreeMap::new();
    for r in rows {
        groups.entry(r.setting).or_default().push(r.stabilizer);
    }
    MeasurementPlan::from_groups(groups.into_values().collect())
}

/// Report built from one value column of a table.
///
/// Only the published standard errors are known, so each block is diagonal
/// with `shots = 1` and `sigma_SS = stderr^2`.
pub fn report_from_table(rows: &[TableRow], corrected: bool) -> Result<EstimationReport<f64>, TomographyError> {
    let n = rows.first().map(|r| r.stabilizer.n()).ok_or(TomographyError::EmptyPlan)?;
    let mut settings: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut estimates = Vec::with_capacity(rows.len());
    for (i, r) in rows.iter().enumerate() {
        let (mean, stderr) = if corrected { (r.spam_corrected, r.spam_stderr) } else { (r.raw, r.raw_stderr) };
        let missing = || TomographyError::Csv(format!("row {} has no value for {}", i + 1, r.stabilizer));
        let mean = mean.ok_or_else(missing)?;
        settings.entry(r.setting).or_default().push(i);
        estimates.push(StabilizerEstimate {
            stabilizer: r.stabilizer,
            input: r.input,
            clique: 0,
            shots: 1,
            mean,
            stderr: stderr.unwrap_or(0.0),
            out_of_range: mean.abs() > 1.0,
        });
    }
    let mut blocks = Vec::with_capacity(settings.len());
    for (l, members) in settings.into_values().enumerate() {
        let k = members.len();
        let mut sigma = vec![vec![0.0; k]; k];
        for (a, &i) in members.iter().enumerate() {
            estimates[i].clique = l;
            sigma[a][a] = estimates[i].stderr.powi(2);
        }
        blocks.push(CovarianceBlock { clique: l, members, shots: 1, sigma });
    }
    Ok(EstimationReport { n, spam_corrected: corrected, estimates, blocks })
}

/// Table rows from a raw report and, optionally, its corrected counterpart.
pub fn table_rows(raw: &EstimationReport<f64>, corrected: Option<&EstimationReport<f64>>) -> Vec<TableRow> {
    raw.estimates
        .iter()
        .map(|e| {
            let c = corrected.and_then(|c| c.find(&e.stabilizer));
            TableRow {
                input: e.input,
                stabilizer: e.stabilizer,
                raw: Some(e.mean),
                raw_stderr: Some(e.stderr),
                spam_corrected: c.map(|c| c.mean),
                spam_stderr: c.map(|c| c.stderr),
                setting: e.clique,
            }
        })
        .collect()
}

#[derive(Serialize)]
struct BarRow<'a> {
    input: &'a BinaryVector,
    stabilizer: &'a PauliOperator,
    value: f64,
    stderr: f64,
}

/// `input, stabilizer, value, stderr` rows, sorted by input.
pub fn write_bar_chart_csv<W: io::Write>(report: &EstimationReport<f64>, writer: W) -> Result<(), TomographyError> {
    let mut w = csv::Writer::from_writer(writer);
    let mut es: Vec<&StabilizerEstimate<f64>> = report.estimates.iter().collect();
    es.sort_by_key(|e| e.input);
    if es.is_empty() {
        w.write_record(["input", "stabilizer", "value", "stderr"]).map_err(csv_err)?;
    }
    for e in es {
        w.serialize(BarRow { input: &e.input, stabilizer: &e.stabilizer, value: e.mean, stderr: e.stderr })
            .map_err(csv_err)?;
    }
    w.flush().map_err(|e| TomographyError::Io(e.to_string()))
}
