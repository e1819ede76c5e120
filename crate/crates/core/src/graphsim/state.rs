use num_complex::Complex;
use rand::distributions::{Distribution, WeightedIndex};
use rand::Rng;

use super::gate::{Basis, Circuit, GateOp};
use super::SimError;
use crate::pauli_core::{BinaryVector, PauliOperator};
use crate::Real;

/// Largest register the dense simulator accepts.
pub const MAX_SIM_QUBITS: usize = 24;

/// Dense state vector; bit `j` of a basis index is the value of qubit `j`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector<T: Real> {
    n: usize,
    amps: Vec<Complex<T>>,
}

impl<T: Real> StateVector<T> {
    pub fn zero(n: usize) -> Result<Self, SimError> {
        Self::basis_state(n, 0)
    }

    pub fn basis_state(n: usize, index: usize) -> Result<Self, SimError> {
        if n > MAX_SIM_QUBITS {
            return Err(SimError::TooManyQubits(n));
        }
        if index >= 1 << n {
            return Err(SimError::DimensionMismatch { expected: 1 << n, found: index });
        }
        let mut amps = vec![Complex::new(T::zero(), T::zero()); 1 << n];
        amps[index] = Complex::new(T::one(), T::zero());
        Ok(StateVector { n, amps })
    }

    /// Wraps amplitudes whose squared norm is 1 within `1e-6`.
    pub fn from_amplitudes(n: usize, amps: Vec<Complex<T>>) -> Result<Self, SimError> {
        if n > MAX_SIM_QUBITS {
            return Err(SimError::TooManyQubits(n));
        }
        if amps.len() != 1 << n {
            return Err(SimError::DimensionMismatch { expected: 1 << n, found: amps.len() });
        }
        let s = StateVector { n, amps };
        let norm = s.norm_sqr().as_f64();
        if (norm - 1.0).abs() > 1e-6 {
            return Err(SimError::NotNormalized(norm));
        }
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn amplitudes(&self) -> &[Complex<T>] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> T {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<T> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn inner(&self, other: &StateVector<T>) -> Complex<T> {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .fold(Complex::new(T::zero(), T::zero()), |s, v| s + v)
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &StateVector<T>) -> T {
        self.inner(other).norm_sqr()
    }

    fn apply_single(&mut self, q: usize, m: &[[Complex<T>; 2]; 2]) {
        let stride = 1usize << q;
        let dim = self.amps.len();
        let mut base = 0;
        while base < dim {
            for i in base..base + stride {
                let (a0, a1) = (self.amps[i], self.amps[i + stride]);
                self.amps[i] = m[0][0] * a0 + m[0][1] * a1;
                self.amps[i + stride] = m[1][0] * a0 + m[1][1] * a1;
            }
            base += 2 * stride;
        }
    }

    pub fn apply_gate(&mut self, gate: &GateOp) -> Result<(), SimError> {
        if gate.targets().iter().any(|&q| q >= self.n) {
            return Err(SimError::InvalidGate(format!("{gate:?} on {} qubits", self.n)));
        }
        match *gate {
            GateOp::Cz { a, b } => {
                let mask = (1usize << a) | (1usize << b);
                for (i, amp) in self.amps.iter_mut().enumerate() {
                    if i & mask == mask {
                        *amp = -*amp;
                    }
                }
            }
            GateOp::Rxx { a, b, theta } => {
                let mask = (1usize << a) | (1usize << b);
                let (s, c) = theta.sin_cos();
                let c = T::from_f64_lossy(c);
                let mis = Complex::new(T::zero(), -T::from_f64_lossy(s));
                for i in 0..self.amps.len() {
                    if i >> a & 1 == 0 {
                        let j = i ^ mask;
                        let (ai, aj) = (self.amps[i], self.amps[j]);
                        self.amps[i] = ai * c + mis * aj;
                        self.amps[j] = aj * c + mis * ai;
                    }
                }
            }
            _ => {
                let m = gate.matrix_in::<T>().expect("single-qubit gate");
                self.apply_single(gate.targets()[0], &m);
            }
        }
        Ok(())
    }

    pub fn apply_circuit(&mut self, circuit: &Circuit) -> Result<(), SimError> {
        if circuit.n() != self.n {
            return Err(SimError::DimensionMismatch { expected: self.n, found: circuit.n() });
        }
        for g in circuit.gates() {
            self.apply_gate(g)?;
        }
        Ok(())
    }

    /// Applies `X^x Z^z` (bit masks), dropping the overall phase.
    pub fn apply_pauli_masks(&mut self, x: u64, z: u64) {
        if z != 0 {
            for (i, amp) in self.amps.iter_mut().enumerate() {
                if (i as u64 & z).count_ones() & 1 == 1 {
                    *amp = -*amp;
                }
            }
        }
        if x != 0 {
            let x = x as usize;
            for i in 0..self.amps.len() {
                let j = i ^ x;
                if i < j {
                    self.amps.swap(i, j);
                }
            }
        }
    }

    /// `<psi|P|psi>` for Hermitian `P`.
    pub fn pauli_expectation(&self, p: &PauliOperator) -> Result<T, SimError> {
        if p.n() != self.n {
            return Err(SimError::DimensionMismatch { expected: self.n, found: p.n() });
        }
        if !p.is_hermitian() {
            return Err(SimError::NonHermitian(p.to_string()));
        }
        let a = p.xbits().bits() as usize;
        let b = p.zbits().bits() as usize;
        let mut acc = Complex::new(T::zero(), T::zero());
        for (k, amp) in self.amps.iter().enumerate() {
            let term = self.amps[k ^ a].conj() * amp;
            if (k & b).count_ones() & 1 == 1 {
                acc -= term;
            } else {
                acc += term;
            }
        }
        // i^(phase + |a & b|) is real for a Hermitian operator.
        let k = (u32::from(p.phase_exp()) + (a & b).count_ones()) % 4;
        let value = match k {
            0 => acc.re,
            1 => -acc.im,
            2 => -acc.re,
            _ => acc.im,
        };
        Ok(value)
    }

    /// Copy rotated so that a computational-basis measurement reads out `bases`.
    pub fn rotated(&self, bases: &[Basis]) -> Result<StateVector<T>, SimError> {
        if bases.len() != self.n {
            return Err(SimError::DimensionMismatch { expected: self.n, found: bases.len() });
        }
        let mut s = self.clone();
        for (q, &b) in bases.iter().enumerate() {
            if b != Basis::Z {
                s.apply_gate(&GateOp::BasisRot { qubit: q, basis: b })?;
            }
        }
        Ok(s)
    }

    /// One computational-basis outcome by inverse-CDF lookup of `u` in `[0, 1)`.
    pub fn sample_index_with(&self, u: f64) -> usize {
        let mut acc = 0.0;
        let mut last_nonzero = 0;
        for (i, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr().as_f64();
            if p > 0.0 {
                last_nonzero = i;
            }
            acc += p;
            if u < acc {
                return i;
            }
        }
        last_nonzero
    }
}

pub fn apply_circuit<T: Real>(state: &StateVector<T>, circuit: &Circuit) -> Result<StateVector<T>, SimError> {
    let mut s = state.clone();
    s.apply_circuit(circuit)?;
    Ok(s)
}

pub fn pauli_expectation<T: Real>(state: &StateVector<T>, p: &PauliOperator) -> Result<T, SimError> {
    state.pauli_expectation(p)
}

/// `shots` i.i.d. outcomes after rotating into `bases`; bit 0 is the `+1` eigenvalue.
pub fn measure_and_sample<T: Real, R: Rng + ?Sized>(
    state: &StateVector<T>,
    bases: &[Basis],
    shots: usize,
    rng: &mut R,
) -> Result<Vec<BinaryVector>, SimError> {
    if shots == 0 {
        return Err(SimError::InvalidShots);
    }
    let rotated = state.rotated(bases)?;
    let weights: Vec<f64> = rotated.amps.iter().map(|a| a.norm_sqr().as_f64()).collect();
    let dist = WeightedIndex::new(&weights).map_err(|e| SimError::Sampling(e.to_string()))?;
    let n = state.n;
    Ok((0..shots).map(|_| BinaryVector::from_bits(n, dist.sample(rng) as u64)).collect())
}

/// Odd-parity population of qubits `a` and `b`.
pub fn parity_population_a<T: Real>(state: &StateVector<T>, a: usize, b: usize) -> T {
    state.amps.iter().enumerate().filter(|(i, _)| ((i >> a) ^ (i >> b)) & 1 == 1).map(|(_, amp)| amp.norm_sqr()).sum()
}
