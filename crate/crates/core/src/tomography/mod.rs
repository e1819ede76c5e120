//! Stabilizer tomography of graph states: grouping into measurement settings,
//! expectation and covariance estimates, fidelity and witness, readout
//! correction, and randomized fidelity sampling.

mod confusion;
mod dataset;
mod estimate;
mod plan;
mod table;

pub use confusion::{ConfusionModel, ConfusionSpec};
pub use dataset::{simulate_dataset, CliqueTally, ShotDataset};
pub use estimate::{
    estimate_expectations, fidelity_and_witness, spam_correct, CovarianceBlock, EstimationReport, FidelityEstimate,
    StabilizerEstimate,
};
pub use plan::{greedy_clique_cover, nontrivial_stabilizers, Clique, MeasurementPlan, PlannedStabilizer};
pub use table::{
    plan_from_table, read_table_csv, reference_table, report_from_table, table_rows, write_bar_chart_csv,
    write_table_csv, TableRow, C6_REFERENCE_CSV,
};

use std::sync::OnceLock;

use rand::Rng;
use thiserror::Error;

use crate::graphsim::{
    noisy_sampler, Basis, Circuit, NoiseParams, SimError, StreamId, TrajectoryRng, TrajectorySampler,
};
use crate::pauli_core::{Pauli, PauliError, StabilizerGroup};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TomographyError {
    #[error("no stabilizers given")]
    EmptyPlan,
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("stabilizer {0} appears twice")]
    DuplicateStabilizer(String),
    #[error("{0} is not a Hermitian Pauli")]
    InvalidStabilizer(String),
    #[error("{0} and {1} do not commute locally")]
    NotLocallyCommuting(String, String),
    #[error("dataset does not match the plan: {0}")]
    PlanMismatch(String),
    #[error("setting {0} has no shots")]
    NoShots(usize),
    #[error("unknown stabilizer {0}")]
    UnknownStabilizer(String),
    #[error("{0} and {1} were measured in different settings")]
    CrossClique(String, String),
    #[error("report is missing {} stabilizers: {}", .0.len(), .0.join(", "))]
    IncompleteCoverage(Vec<String>),
    #[error("invalid confusion matrix: {0}")]
    InvalidConfusion(String),
    #[error("confusion matrix is singular: {0}")]
    SingularConfusion(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error("io: {0}")]
    Io(String),
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

/// `ceil(8 ln(4/delta) / epsilon^2)` samples for randomized fidelity estimation.
pub fn sampling_budget(epsilon: f64, delta: f64) -> Result<u64, TomographyError> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(TomographyError::InvalidArgument(format!("epsilon = {epsilon} is outside (0, 1]")));
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(TomographyError::InvalidArgument(format!("delta = {delta} is outside (0, 1)")));
    }
    let x = 8.0 * (4.0 / delta).ln() / (epsilon * epsilon);
    // Absorb rounding so exact integers are not pushed up by one ulp.
    Ok((x - 1e-9 * x.max(1.0)).ceil() as u64)
}

/// Fidelity from `shots` single-shot readouts of uniformly random group elements.
///
/// Returns the mean of the `+-1` outcomes and its standard error.
pub fn randomized_fidelity(
    group: &StabilizerGroup,
    prep: &Circuit,
    noise: &NoiseParams,
    shots: usize,
    rng: &TrajectoryRng,
    experiment: u64,
) -> Result<(f64, f64), TomographyError> {
    if shots == 0 {
        return Err(TomographyError::NoShots(0));
    }
    let k = group.generators().len();
    if k > 20 {
        return Err(TomographyError::InvalidArgument(format!("group of order 2^{k} is too large")));
    }
    let samplers: Vec<OnceLock<Result<TrajectorySampler<f64>, SimError>>> =
        (0..1usize << k).map(|_| OnceLock::new()).collect();
    let mut sum = 0.0;
    let mut sq = 0.0;
    for shot in 0..shots as u64 {
        let mut r = rng.stream(StreamId { experiment, setting: 0, shot });
        let c = r.gen_range(0..1u64 << k);
        let p = group.element(&crate::pauli_core::BinaryVector::from_bits(k, c));
        let sampler = samplers[c as usize].get_or_init(|| {
            let bases: Vec<Basis> = p
                .factors()
                .iter()
                .map(|f| match f {
                    Pauli::X => Basis::X,
                    Pauli::Y => Basis::Y,
                    _ => Basis::Z,
                })
                .collect();
            noisy_sampler(prep, noise, &bases)
        });
        let sampler = sampler.as_ref().map_err(|e| TomographyError::Sim(e.clone()))?;
        let b = sampler.sample(&mut r);
        let v = if p.support().dot(&b) ^ p.sign().is_some_and(|s| s.is_minus()) { -1.0 } else { 1.0 };
        sum += v;
        sq += v * v;
    }
    let m = shots as f64;
    let mean = sum / m;
    let var = (sq / m - mean * mean).max(0.0) * m / (m - 1.0).max(1.0);
    Ok((mean, (var / m).sqrt()))
}

/// `value(uncertainty)` with the uncertainty in units of the last printed digit.
pub fn format_with_uncertainty(value: f64, stderr: f64, decimals: usize) -> String {
    let u = (stderr * 10f64.powi(decimals as i32)).round().max(1.0) as u64;
    format!("{value:.decimals$}({u})")
}
