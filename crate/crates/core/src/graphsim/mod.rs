//! Dense state-vector simulation of cycle graph state preparation and noisy readout.

mod gate;
mod noise;
mod state;
mod trajectory;

pub use gate::{
    bases_to_string, basis_matrix, decompose_rz_rxy, edge_coloring, mat_mul, measurement_circuit,
    merge_single_qubit_runs, parse_bases, preparation_circuit, rxy_matrix, rz_matrix, wrap_angle, Basis, Circuit,
    GateOp, Mat2, PrepForm,
};
pub use noise::{CrosstalkEntry, NoiseParams, DEFAULT_PC, DEFAULT_T1_GATE, DEFAULT_T2, DEFAULT_T2_GATE};
pub use state::{
    apply_circuit, measure_and_sample, parity_population_a, pauli_expectation, StateVector, MAX_SIM_QUBITS,
};
pub use trajectory::{noisy_sampler, noisy_shot, rxx_parity_population, StreamId, TrajectoryRng, TrajectorySampler};

use thiserror::Error;

use crate::pauli_core::{CycleGraph, PauliError};
use crate::Real;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{0} qubits exceeds the dense simulator limit")]
    TooManyQubits(usize),
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("state is not normalised (norm^2 = {0})")]
    NotNormalized(f64),
    #[error("operator {0} is not Hermitian")]
    NonHermitian(String),
    #[error("invalid noise parameters: {0}")]
    InvalidNoise(String),
    #[error("shot count must be at least 1")]
    InvalidShots,
    #[error("sampling failed: {0}")]
    Sampling(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Pauli(#[from] PauliError),
}

/// Ideal cycle graph state `|C_n>`.
pub fn cluster_state<T: Real>(graph: &CycleGraph, form: PrepForm) -> Result<StateVector<T>, SimError> {
    let mut s = StateVector::zero(graph.n())?;
    s.apply_circuit(&preparation_circuit(graph, form)?)?;
    Ok(s)
}
