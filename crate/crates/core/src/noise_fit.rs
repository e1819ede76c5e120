//! Grid-search fit of the gate error rates `(p1d, p2XX, p2d)` to a reference
//! stabilizer report: keep grid points whose fidelity matches, then minimize the
//! mean absolute stabilizer difference among them.

use std::collections::BTreeSet;
use std::io;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphsim::{preparation_circuit, NoiseParams, PrepForm, SimError, TrajectoryRng};
use crate::pauli_core::{CycleGraph, PauliError, PauliOperator};
use crate::tomography::{estimate_expectations, simulate_dataset, EstimationReport, MeasurementPlan, TomographyError};

pub const MIN_FIT_SHOTS: usize = 10_000;
pub const DEFAULT_TOLERANCE: f64 = 0.005;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FitError {
    #[error("reports cover different stabilizers: {0}")]
    Coverage(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error(transparent)]
    Tomography(#[from] TomographyError),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

fn paired_differences(exp: &EstimationReport<f64>, sim: &EstimationReport<f64>) -> Result<Vec<f64>, FitError> {
    let keys = |r: &EstimationReport<f64>| -> BTreeSet<PauliOperator> {
        r.estimates.iter().map(|e| e.stabilizer.unsigned()).filter(|p| !p.is_identity()).collect()
    };
    let (a, b) = (keys(exp), keys(sim));
    if exp.n != sim.n || a != b {
        let diff: Vec<String> = a.symmetric_difference(&b).map(|p| p.to_string()).collect();
        return Err(FitError::Coverage(if diff.is_empty() { "qubit counts differ".into() } else { diff.join(", ") }));
    }
    Ok(exp
        .estimates
        .iter()
        .filter(|e| !e.stabilizer.is_identity())
        .map(|e| e.mean - sim.value_of(&e.stabilizer).expect("same coverage"))
        .collect())
}

/// `2^{-n} |sum_S (<S>_exp - <S>_sim)|`; the identity contributes nothing.
pub fn delta_fidelity(exp: &EstimationReport<f64>, sim: &EstimationReport<f64>) -> Result<f64, FitError> {
    let d = paired_differences(exp, sim)?;
    Ok(d.iter().sum::<f64>().abs() * 0.5f64.powi(exp.n as i32))
}

/// `2^{-n} sum_S |<S>_exp - <S>_sim|`.
pub fn delta_stabilizers(exp: &EstimationReport<f64>, sim: &EstimationReport<f64>) -> Result<f64, FitError> {
    let d = paired_differences(exp, sim)?;
    Ok(d.iter().map(|v| v.abs()).sum::<f64>() * 0.5f64.powi(exp.n as i32))
}

/// The settings a report was measured with, members in report order.
pub fn plan_of_report(report: &EstimationReport<f64>) -> Result<MeasurementPlan, FitError> {
    let cliques = report.estimates.iter().map(|e| e.clique).max().map_or(0, |m| m + 1);
    let mut groups = vec![Vec::new(); cliques];
    for e in &report.estimates {
        groups[e.clique].push(e.stabilizer);
    }
    groups.retain(|g| !g.is_empty());
    Ok(MeasurementPlan::from_groups(groups)?)
}

/// Simulated raw report for the `RXX`-compiled cycle state under `noise`.
pub fn simulate_report(
    plan: &MeasurementPlan,
    noise: &NoiseParams,
    shots: usize,
    rng: &TrajectoryRng,
    experiment: u64,
) -> Result<EstimationReport<f64>, FitError> {
    let prep = preparation_circuit(&CycleGraph::new(plan.n)?, PrepForm::Rxx)?;
    let data = simulate_dataset(plan, &prep, noise, shots, rng, experiment, None)?;
    Ok(estimate_expectations(plan, &data)?)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitGrid {
    pub p1d: Vec<f64>,
    #[serde(rename = "p2XX")]
    pub p2xx: Vec<f64>,
    pub p2d: Vec<f64>,
    pub shots: usize,
    /// Supplies T2, gate times and crosstalk; its rates are overwritten per point.
    pub base: NoiseParams,
    pub tolerance: f64,
    pub seed: u64,
    /// Stream family shared by every grid point, so points differ only in the rates.
    pub experiment: u64,
}

fn axis(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let k = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=k).map(|i| lo + step * i as f64).collect()
}

impl FitGrid {
    pub fn new(p1d: Vec<f64>, p2xx: Vec<f64>, p2d: Vec<f64>, shots: usize, seed: u64) -> Self {
        FitGrid {
            p1d,
            p2xx,
            p2d,
            shots,
            base: NoiseParams::default(),
            tolerance: DEFAULT_TOLERANCE,
            seed,
            experiment: 0,
        }
    }

    /// `p1d` over 0..3% in steps of 0.4%, `p2XX` and `p2d` over 0..6% in steps of 0.5%.
    pub fn default_grid(seed: u64) -> Self {
        Self::new(axis(0.0, 0.03, 0.004), axis(0.0, 0.06, 0.005), axis(0.0, 0.06, 0.005), MIN_FIT_SHOTS, seed)
    }

    pub fn validate(&self) -> Result<(), FitError> {
        for (name, a) in [("p1d", &self.p1d), ("p2XX", &self.p2xx), ("p2d", &self.p2d)] {
            if a.is_empty() {
                return Err(FitError::InvalidGrid(format!("{name} axis is empty")));
            }
            if a.windows(2).any(|w| w[1] <= w[0]) {
                return Err(FitError::InvalidGrid(format!("{name} axis is not strictly increasing")));
            }
            if a.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(FitError::InvalidGrid(format!("{name} axis leaves [0, 1]")));
            }
        }
        if self.shots < MIN_FIT_SHOTS {
            return Err(FitError::InvalidGrid(format!(
                "{} shots per setting, need at least {MIN_FIT_SHOTS}",
                self.shots
            )));
        }
        if self.tolerance.is_nan() || self.tolerance < 0.0 {
            return Err(FitError::InvalidGrid("negative tolerance".into()));
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.p1d.len() * self.p2xx.len() * self.p2d.len());
        for &a in &self.p1d {
            for &b in &self.p2xx {
                for &c in &self.p2d {
                    out.push((a, b, c));
                }
            }
        }
        out
    }

    pub fn noise_at(&self, (p1d, p2xx, p2d): (f64, f64, f64)) -> NoiseParams {
        NoiseParams { p1d, p2xx, p2d, ..self.base.clone() }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    pub p1d: f64,
    #[serde(rename = "p2XX")]
    pub p2xx: f64,
    pub p2d: f64,
    pub delta_f: f64,
    pub delta_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub points: Vec<GridPoint>,
    /// Indices of points with `delta_f <= tolerance`.
    pub level_set: Vec<usize>,
    pub tolerance: f64,
    pub best: usize,
    /// False when the level set was empty and `best` minimizes `delta_f` instead.
    pub best_on_level_set: bool,
    pub best_fit: GridPoint,
    /// `p2XX + (4/5) p2d` at the best fit.
    pub two_qubit_infidelity: f64,
}

/// Simulates the reference's settings at every grid point and selects the point
/// minimizing `delta_s` among those with `delta_f` within tolerance.
///
/// Ties go to the smallest `p1d`, then `p2XX`, then `p2d`.
pub fn grid_fit(reference: &EstimationReport<f64>, grid: &FitGrid) -> Result<FitResult, FitError> {
    grid.validate()?;
    let plan = plan_of_report(reference)?;
    let rng = TrajectoryRng::new(grid.seed);
    let mut points = Vec::new();
    for p in grid.points() {
        let sim = simulate_report(&plan, &grid.noise_at(p), grid.shots, &rng, grid.experiment)?;
        points.push(GridPoint {
            p1d: p.0,
            p2xx: p.1,
            p2d: p.2,
            delta_f: delta_fidelity(reference, &sim)?,
            delta_s: delta_stabilizers(reference, &sim)?,
        });
    }
    Ok(select(points, grid.tolerance))
}

fn lex_key(p: &GridPoint) -> (f64, f64, f64) {
    (p.p1d, p.p2xx, p.p2d)
}

fn argmin(points: &[GridPoint], idx: impl Iterator<Item = usize>, f: impl Fn(&GridPoint) -> f64) -> usize {
    idx.reduce(|a, b| {
        let (fa, fb) = (f(&points[a]), f(&points[b]));
        if fb < fa || (fb == fa && lex_key(&points[b]) < lex_key(&points[a])) {
            b
        } else {
            a
        }
    })
    .expect("grid is nonempty")
}

/// Level-set extraction and tie-broken selection on precomputed metrics.
pub fn select(points: Vec<GridPoint>, tolerance: f64) -> FitResult {
    let level_set: Vec<usize> = (0..points.len()).filter(|&i| points[i].delta_f <= tolerance).collect();
    let (best, on) = if level_set.is_empty() {
        (argmin(&points, 0..points.len(), |p| p.delta_f), false)
    } else {
        (argmin(&points, level_set.iter().copied(), |p| p.delta_s), true)
    };
    let best_fit = points[best].clone();
    let two_qubit_infidelity = best_fit.p2xx + 0.8 * best_fit.p2d;
    FitResult { points, level_set, tolerance, best, best_on_level_set: on, best_fit, two_qubit_infidelity }
}

/// `p1d, p2XX, p2d, delta_f, delta_s` rows.
pub fn write_fit_csv<W: io::Write>(result: &FitResult, writer: W) -> Result<(), FitError> {
    let mut w = csv::Writer::from_writer(writer);
    let err = |e: csv::Error| FitError::Tomography(TomographyError::Csv(e.to_string()));
    w.write_record(["p1d", "p2XX", "p2d", "delta_f", "delta_s"]).map_err(err)?;
    for p in &result.points {
        w.write_record([p.p1d, p.p2xx, p.p2d, p.delta_f, p.delta_s].map(|v| v.to_string())).map_err(err)?;
    }
    w.flush().map_err(|e| FitError::Tomography(TomographyError::Io(e.to_string())))
}
