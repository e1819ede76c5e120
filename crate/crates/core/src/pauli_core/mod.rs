//! Signed Pauli algebra and the stabilizer groups of cycle graph states.
//!
//! Bitstrings and Pauli strings are written qubit 0 first. A Pauli is stored
//! symplectically with an exact phase exponent of `i`, so signs never pass
//! through floating point.

mod binary;
mod group;
mod pauli;

pub use binary::{BinaryVector, MAX_QUBITS};
pub use group::{
    cubic_sign, cycle_stabilizer, generators, membership_with_sign, stabilizer_submeasurements, CycleGraph, Membership,
    StabilizerGroup,
};
pub use pauli::{locally_commutes, multiply, Pauli, PauliOperator, Sign};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PauliError {
    #[error("dimension mismatch: {left} vs {right} qubits")]
    DimensionMismatch { left: usize, right: usize },
    #[error("cycle graph needs at least 3 vertices, got {0}")]
    InvalidGraph(usize),
    #[error("{0} qubits exceeds the supported maximum")]
    TooManyQubits(usize),
    #[error("invalid generators: {0}")]
    InvalidGenerators(String),
    #[error("parse error: {0}")]
    Parse(String),
}
