use std::cmp::Ordering;
use std::fmt;
use std::ops::{BitAnd, BitOr, BitXor, Not};
use std::str::FromStr;

use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::PauliError;

/// Largest register size representable by a single machine word.
pub const MAX_QUBITS: usize = 64;

/// A length-`n` vector over F2, packed into one `u64` (bit `j` is entry `j`).
///
/// Text form writes entry 0 first, so `"100000"` has only bit 0 set. Ordering is
/// by length and then lexicographic on that text form.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct BinaryVector {
    len: u8,
    bits: u64,
}

#[inline]
fn mask_for(len: usize) -> u64 {
    if len == 64 {
        u64::MAX
    } else {
        (1u64 << len) - 1
    }
}

impl BinaryVector {
    pub fn zeros(len: usize) -> Self {
        assert!(len <= MAX_QUBITS, "BinaryVector length {len} exceeds {MAX_QUBITS}");
        BinaryVector { len: len as u8, bits: 0 }
    }

    pub fn ones(len: usize) -> Self {
        Self::from_bits(len, u64::MAX)
    }

    /// Build from a packed word; bits at or above `len` are discarded.
    pub fn from_bits(len: usize, bits: u64) -> Self {
        assert!(len <= MAX_QUBITS, "BinaryVector length {len} exceeds {MAX_QUBITS}");
        BinaryVector { len: len as u8, bits: bits & mask_for(len) }
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Self {
        let mut v = Self::zeros(len);
        for &j in indices {
            v.set(j, true);
        }
        v
    }

    pub fn unit(len: usize, j: usize) -> Self {
        Self::from_indices(len, &[j])
    }

    pub fn from_bools(values: &[bool]) -> Self {
        let mut v = Self::zeros(values.len());
        for (j, &b) in values.iter().enumerate() {
            v.set(j, b);
        }
        v
    }

    /// All `2^len` vectors, in increasing packed-word order.
    pub fn all(len: usize) -> impl Iterator<Item = BinaryVector> {
        assert!(len < MAX_QUBITS, "cannot enumerate 2^{len} vectors");
        (0..1u64 << len).map(move |b| BinaryVector::from_bits(len, b))
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn get(&self, j: usize) -> bool {
        assert!(j < self.len(), "index {j} out of range for length {}", self.len);
        (self.bits >> j) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, j: usize, value: bool) {
        assert!(j < self.len(), "index {j} out of range for length {}", self.len);
        if value {
            self.bits |= 1 << j;
        } else {
            self.bits &= !(1 << j);
        }
    }

    #[inline]
    pub fn flip(&mut self, j: usize) {
        assert!(j < self.len(), "index {j} out of range for length {}", self.len);
        self.bits ^= 1 << j;
    }

    /// Hamming weight.
    #[inline]
    pub fn weight(&self) -> usize {
        self.bits.count_ones() as usize
    }

    #[inline]
    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    /// Inner product over F2.
    #[inline]
    pub fn dot(&self, other: &BinaryVector) -> bool {
        debug_assert_eq!(self.len, other.len);
        (self.bits & other.bits).count_ones() & 1 == 1
    }

    /// Parity of all entries.
    #[inline]
    pub fn parity(&self) -> bool {
        self.bits.count_ones() & 1 == 1
    }

    /// Vector whose entry `j` is entry `j - 1 (mod n)` of `self`.
    pub fn cyclic_prev(&self) -> BinaryVector {
        let n = self.len();
        if n == 0 {
            return *self;
        }
        let top = (self.bits >> (n - 1)) & 1;
        BinaryVector::from_bits(n, (self.bits << 1) | top)
    }

    /// Vector whose entry `j` is entry `j + 1 (mod n)` of `self`.
    pub fn cyclic_next(&self) -> BinaryVector {
        let n = self.len();
        if n == 0 {
            return *self;
        }
        let low = self.bits & 1;
        BinaryVector::from_bits(n, (self.bits >> 1) | (low << (n - 1)))
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len()).map(move |j| self.get(j))
    }

    /// Indices of the set entries, ascending.
    pub fn ones_indices(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.weight());
        let mut b = self.bits;
        while b != 0 {
            out.push(b.trailing_zeros() as usize);
            b &= b - 1;
        }
        out
    }

    pub fn checked_xor(&self, other: &BinaryVector) -> Result<BinaryVector, PauliError> {
        if self.len != other.len {
            return Err(PauliError::DimensionMismatch { left: self.len(), right: other.len() });
        }
        Ok(BinaryVector { len: self.len, bits: self.bits ^ other.bits })
    }

    fn lex_key(&self) -> (u8, u64) {
        let n = self.len();
        let rev = if n == 0 { 0 } else { self.bits.reverse_bits() >> (64 - n) };
        (self.len, rev)
    }
}

impl Ord for BinaryVector {
    fn cmp(&self, other: &Self) -> Ordering {
        self.lex_key().cmp(&other.lex_key())
    }
}

impl PartialOrd for BinaryVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

macro_rules! bitop {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for BinaryVector {
            type Output = BinaryVector;
            #[inline]
            fn $method(self, rhs: BinaryVector) -> BinaryVector {
                assert_eq!(self.len, rhs.len, "BinaryVector length mismatch");
                BinaryVector { len: self.len, bits: self.bits $op rhs.bits }
            }
        }
    };
}

bitop!(BitXor, bitxor, ^);
bitop!(BitAnd, bitand, &);
bitop!(BitOr, bitor, |);

impl Not for BinaryVector {
    type Output = BinaryVector;
    fn not(self) -> BinaryVector {
        BinaryVector::from_bits(self.len(), !self.bits)
    }
}

impl fmt::Display for BinaryVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BinaryVector {
    type Err = PauliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.len() > MAX_QUBITS {
            return Err(PauliError::TooManyQubits(s.len()));
        }
        let mut v = BinaryVector::zeros(s.len());
        for (j, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => v.set(j, true),
                _ => return Err(PauliError::Parse(format!("invalid bit '{c}' in \"{s}\""))),
            }
        }
        Ok(v)
    }
}

impl Serialize for BinaryVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BinaryVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct BitsVisitor;
        impl Visitor<'_> for BitsVisitor {
            type Value = BinaryVector;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a bitstring such as \"010101\"")
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<BinaryVector, E> {
                v.parse().map_err(E::custom)
            }
        }
        deserializer.deserialize_str(BitsVisitor)
    }
}
