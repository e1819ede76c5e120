//! Nonlocal games on cyclic cluster states.
//!
//! The crate covers the stabilizer algebra of cycle graph states, the cubic
//! Boolean function (CBF) and stabilizer submeasurement (SS) games played on
//! them, exact classical bounds for shallow geometric circuits, and a noisy
//! synthetic experiment: trajectory simulation, stabilizer tomography with
//! readout correction, and noise-parameter fitting.
//!
//! Numeric code is generic over [`Scalar`] (exact rationals and floats) or
//! [`Real`] (floats only); the aliases below fix the common choices.

pub mod classical_bounds;
pub mod games;
pub mod gf2;
pub mod graphsim;
pub mod noise_fit;
pub mod pauli_core;
pub mod scalar;
pub mod tomography;

pub use scalar::{Real, Scalar};

pub use pauli_core::{BinaryVector, CycleGraph, PauliOperator, Sign, StabilizerGroup};

/// Exact rational used for win rates and Bell-operator coefficients.
pub type Rational = num_rational::Ratio<i64>;

pub type StateVector64 = graphsim::StateVector<f64>;
pub type StateVector32 = graphsim::StateVector<f32>;
pub type EstimationReport64 = tomography::EstimationReport<f64>;
