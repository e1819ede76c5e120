use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{BinaryVector, PauliError, MAX_QUBITS};

/// Single-qubit Pauli factor.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// `(a, b)` such that the factor is `E(a, b)`.
    pub fn symplectic(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    pub fn from_symplectic(a: bool, b: bool) -> Self {
        match (a, b) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// Sign of a Hermitian group element.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_parity(odd: bool) -> Self {
        if odd {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    /// `true` for `Minus`: the parity a winning output must carry.
    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }

    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

/// Signed n-qubit Pauli `i^phase * prod_j i^(a_j b_j) X_j^a_j Z_j^b_j`.
///
/// With this convention every unsigned Pauli string (including `Y = E(1,1)`) has
/// phase 0, and Hermitian operators are exactly those with even phase.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct PauliOperator {
    x: BinaryVector,
    z: BinaryVector,
    phase: u8,
}

impl PauliOperator {
    pub fn identity(n: usize) -> Self {
        PauliOperator { x: BinaryVector::zeros(n), z: BinaryVector::zeros(n), phase: 0 }
    }

    /// `E(a, b)` with phase 0.
    pub fn weyl(a: BinaryVector, b: BinaryVector) -> Result<Self, PauliError> {
        Self::from_parts(a, b, 0)
    }

    pub fn from_parts(x: BinaryVector, z: BinaryVector, phase: u8) -> Result<Self, PauliError> {
        if x.len() != z.len() {
            return Err(PauliError::DimensionMismatch { left: x.len(), right: z.len() });
        }
        Ok(PauliOperator { x, z, phase: phase & 3 })
    }

    /// Operator acting as `p` on qubit `j` and identity elsewhere.
    pub fn single(n: usize, j: usize, p: Pauli) -> Self {
        let (a, b) = p.symplectic();
        let mut op = Self::identity(n);
        op.x.set(j, a);
        op.z.set(j, b);
        op
    }

    pub fn from_factors(factors: &[Pauli]) -> Self {
        let n = factors.len();
        let mut op = Self::identity(n);
        for (j, p) in factors.iter().enumerate() {
            let (a, b) = p.symplectic();
            op.x.set(j, a);
            op.z.set(j, b);
        }
        op
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.x.len()
    }

    #[inline]
    pub fn xbits(&self) -> BinaryVector {
        self.x
    }

    #[inline]
    pub fn zbits(&self) -> BinaryVector {
        self.z
    }

    #[inline]
    pub fn phase_exp(&self) -> u8 {
        self.phase
    }

    pub fn with_phase(mut self, phase: u8) -> Self {
        self.phase = phase & 3;
        self
    }

    pub fn with_sign(self, sign: Sign) -> Self {
        self.with_phase(if sign.is_minus() { 2 } else { 0 })
    }

    /// Same Pauli string with phase 0.
    pub fn unsigned(&self) -> Self {
        self.with_phase(0)
    }

    pub fn negated(&self) -> Self {
        self.with_phase(self.phase + 2)
    }

    pub fn is_identity(&self) -> bool {
        self.x.is_zero() && self.z.is_zero()
    }

    pub fn is_hermitian(&self) -> bool {
        self.phase & 1 == 0
    }

    /// `Some(sign)` for Hermitian operators.
    pub fn sign(&self) -> Option<Sign> {
        match self.phase {
            0 => Some(Sign::Plus),
            2 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn factor(&self, j: usize) -> Pauli {
        Pauli::from_symplectic(self.x.get(j), self.z.get(j))
    }

    pub fn factors(&self) -> Vec<Pauli> {
        (0..self.n()).map(|j| self.factor(j)).collect()
    }

    pub fn support(&self) -> BinaryVector {
        self.x | self.z
    }

    pub fn weight(&self) -> usize {
        self.support().weight()
    }

    /// Packed symplectic vector `x | z << 64`.
    #[inline]
    pub fn symplectic_word(&self) -> u128 {
        u128::from(self.x.bits()) | (u128::from(self.z.bits()) << 64)
    }

    pub fn multiply(&self, other: &PauliOperator) -> Result<PauliOperator, PauliError> {
        if self.n() != other.n() {
            return Err(PauliError::DimensionMismatch { left: self.n(), right: other.n() });
        }
        let (a, b) = (self.x.bits(), self.z.bits());
        let (c, d) = (other.x.bits(), other.z.bits());
        // Reorder X^c past Z^b, then absorb the i^(ab) normalisation of each side.
        let pc = |w: u64| w.count_ones() as i64;
        let exp = i64::from(self.phase) + i64::from(other.phase) + pc(a & b) + pc(c & d) + 2 * pc(b & c)
            - pc((a ^ c) & (b ^ d));
        Ok(PauliOperator { x: self.x ^ other.x, z: self.z ^ other.z, phase: exp.rem_euclid(4) as u8 })
    }

    /// Whether the two operators commute as a whole (symplectic form vanishes).
    pub fn commutes(&self, other: &PauliOperator) -> Result<bool, PauliError> {
        if self.n() != other.n() {
            return Err(PauliError::DimensionMismatch { left: self.n(), right: other.n() });
        }
        let s = (self.x & other.z).weight() + (self.z & other.x).weight();
        Ok(s.is_multiple_of(2))
    }

    /// Qubit-wise commutation: factors agree wherever both are non-identity.
    pub fn locally_commutes(&self, other: &PauliOperator) -> Result<bool, PauliError> {
        if self.n() != other.n() {
            return Err(PauliError::DimensionMismatch { left: self.n(), right: other.n() });
        }
        let both = self.support() & other.support();
        let differ = (self.x ^ other.x) | (self.z ^ other.z);
        Ok((both & differ).is_zero())
    }

    /// Unsigned letter string, qubit 0 first.
    pub fn letters(&self) -> String {
        self.factors().into_iter().map(Pauli::as_char).collect()
    }
}

pub fn multiply(p: &PauliOperator, q: &PauliOperator) -> Result<PauliOperator, PauliError> {
    p.multiply(q)
}

pub fn locally_commutes(p: &PauliOperator, q: &PauliOperator) -> Result<bool, PauliError> {
    p.locally_commutes(q)
}

impl Mul for PauliOperator {
    type Output = PauliOperator;

    /// Panics on a size mismatch; use [`PauliOperator::multiply`] to handle it.
    fn mul(self, rhs: PauliOperator) -> PauliOperator {
        self.multiply(&rhs).expect("Pauli operators of different sizes")
    }
}

impl PartialOrd for PauliOperator {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PauliOperator {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.n(), self.letters(), self.phase).cmp(&(other.n(), other.letters(), other.phase))
    }
}

impl fmt::Display for PauliOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let prefix = match self.phase {
            0 => "+",
            1 => "+i",
            2 => "-",
            _ => "-i",
        };
        write!(f, "{prefix}{}", self.letters())
    }
}

impl FromStr for PauliOperator {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (phase, body) = if let Some(rest) = s.strip_prefix("+i") {
            (1, rest)
        } else if let Some(rest) = s.strip_prefix("-i").or_else(|| s.strip_prefix("\u{2212}i")) {
            (3, rest)
        } else if let Some(rest) = s.strip_prefix('+') {
            (0, rest)
        } else if let Some(rest) = s.strip_prefix('-').or_else(|| s.strip_prefix('\u{2212}')) {
            (2, rest)
        } else if let Some(rest) = s.strip_prefix('i') {
            (1, rest)
        } else {
            (0, s)
        };
        if body.is_empty() {
            return Err(PauliError::Parse(format!("empty Pauli string \"{s}\"")));
        }
        if body.chars().count() > MAX_QUBITS {
            return Err(PauliError::TooManyQubits(body.chars().count()));
        }
        let factors = body
            .chars()
            .map(|c| match c {
                'I' => Ok(Pauli::I),
                'X' => Ok(Pauli::X),
                'Y' => Ok(Pauli::Y),
                'Z' => Ok(Pauli::Z),
                _ => Err(PauliError::Parse(format!("invalid Pauli letter '{c}' in \"{s}\""))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(PauliOperator::from_factors(&factors).with_phase(phase))
    }
}

impl Serialize for PauliOperator {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for PauliOperator {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
