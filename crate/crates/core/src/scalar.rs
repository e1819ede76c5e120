//! Scalar abstractions shared by the exact and floating-point code paths.

use std::fmt::Debug;
use std::iter::Sum;
use std::ops::Neg;

use num_rational::Ratio;
use num_traits::{Float, FromPrimitive, Num, NumAssign};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// A field-like number type: `f32`, `f64`, or an exact rational.
///
/// Game-level expressions (win rates, Bell operators) are written against this
/// trait so the same code produces exact rationals for the classical analysis and
/// floats for simulated data.
pub trait Scalar: Num + NumAssign + Neg<Output = Self> + Clone + PartialOrd + Debug + Send + Sync {
    /// `num / den` in this scalar type.
    fn from_ratio(num: i64, den: i64) -> Self;

    fn as_f64(&self) -> f64;

    fn from_count(count: usize) -> Self {
        Self::from_ratio(count as i64, 1)
    }
}

impl Scalar for f64 {
    fn from_ratio(num: i64, den: i64) -> Self {
        num as f64 / den as f64
    }
    fn as_f64(&self) -> f64 {
        *self
    }
}

impl Scalar for f32 {
    fn from_ratio(num: i64, den: i64) -> Self {
        (num as f64 / den as f64) as f32
    }
    fn as_f64(&self) -> f64 {
        f64::from(*self)
    }
}

impl Scalar for Ratio<i64> {
    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(num, den)
    }
    fn as_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

impl Scalar for Ratio<i128> {
    fn from_ratio(num: i64, den: i64) -> Self {
        Ratio::new(i128::from(num), i128::from(den))
    }
    fn as_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

/// Floating-point scalar used by the state-vector simulator and the estimators.
pub trait Real: Scalar + Float + FromPrimitive + Default + Sum + Serialize + DeserializeOwned + 'static {
    fn from_f64_lossy(value: f64) -> Self {
        <Self as FromPrimitive>::from_f64(value).expect("finite f64 converts to any float type")
    }
}

impl Real for f64 {}
impl Real for f32 {}
