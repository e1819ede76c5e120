use std::collections::BTreeMap;
use std::fmt;

use super::{GameError, GameInstance};
use crate::pauli_core::{BinaryVector, PauliOperator};
use crate::Scalar;

/// Success probability as a linear combination of Pauli correlators.
///
/// Keys are unsigned operators; the identity carries the constant term.
#[derive(Clone, Debug, PartialEq)]
pub struct BellOperator<T: Scalar> {
    pub n: usize,
    pub terms: BTreeMap<PauliOperator, T>,
}

impl<T: Scalar> BellOperator<T> {
    pub fn coefficient(&self, p: &PauliOperator) -> T {
        self.terms.get(&p.unsigned()).cloned().unwrap_or_else(T::zero)
    }

    pub fn constant(&self) -> T {
        self.coefficient(&PauliOperator::identity(self.n))
    }

    /// `sum_P c_P <P>` with `<I> = 1`.
    pub fn evaluate<F>(&self, mut expectation: F) -> Result<T, GameError>
    where
        F: FnMut(&PauliOperator) -> Option<T>,
    {
        let mut acc = T::zero();
        for (p, c) in &self.terms {
            let e = if p.is_identity() { T::one() } else { expectation(p).ok_or(GameError::MissingExpectation(*p))? };
            acc += c.clone() * e;
        }
        Ok(acc)
    }
}

impl<T: Scalar + fmt::Display> fmt::Display for BellOperator<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (p, c) in &self.terms {
            if !first {
                f.write_str(" + ")?;
            }
            first = false;
            if p.is_identity() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}<{}>", p.letters())?;
            }
        }
        Ok(())
    }
}

/// Collects `(1/|I|) sum_x (1/|P_x|) sgn(P) P` into one coefficient per operator.
pub fn bell_operator<T: Scalar>(game: &GameInstance) -> BellOperator<T> {
    let mut terms: BTreeMap<PauliOperator, T> = BTreeMap::new();
    let m = game.inputs().len() as i64;
    for i in 0..game.inputs().len() {
        let t = game.terms(i);
        let w = T::from_ratio(1, m * t.len() as i64);
        for (p, s) in t {
            let c = if s.is_minus() { -w.clone() } else { w.clone() };
            *terms.entry(*p).or_insert_with(T::zero) += c;
        }
    }
    terms.retain(|_, c| *c != T::zero());
    BellOperator { n: game.n(), terms }
}

/// Win probability from correlators that may depend on the input.
pub fn bell_success_probability_with_inputs<T, F>(game: &GameInstance, mut expectation: F) -> Result<T, GameError>
where
    T: Scalar,
    F: FnMut(&BinaryVector, &PauliOperator) -> Option<T>,
{
    let m = game.inputs().len() as i64;
    let mut acc = T::zero();
    for (i, x) in game.inputs().iter().enumerate() {
        let t = game.terms(i);
        let mut sum = T::zero();
        for (p, s) in t {
            let e =
                if p.is_identity() { T::one() } else { expectation(x, p).ok_or(GameError::MissingExpectation(*p))? };
            if s.is_minus() {
                sum -= e;
            } else {
                sum += e;
            }
        }
        acc += sum * T::from_ratio(1, t.len() as i64);
    }
    Ok(acc * T::from_ratio(1, m))
}

/// Win probability of a strategy whose correlators do not depend on the input,
/// e.g. measurements on a fixed quantum state.
pub fn bell_success_probability<T, F>(game: &GameInstance, mut expectation: F) -> Result<T, GameError>
where
    T: Scalar,
    F: FnMut(&PauliOperator) -> Option<T>,
{
    bell_success_probability_with_inputs(game, |_, p| expectation(p))
}
