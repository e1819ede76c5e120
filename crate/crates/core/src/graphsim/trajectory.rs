use std::collections::BTreeMap;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gate::{measurement_circuit, Basis, Circuit, GateOp};
use super::noise::NoiseParams;
use super::state::StateVector;
use super::SimError;
use crate::pauli_core::BinaryVector;
use crate::Real;

/// Position of one shot in the `(experiment, setting, shot)` stream hierarchy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamId {
    pub experiment: u64,
    pub setting: u64,
    pub shot: u64,
}

/// Deterministic source of independent per-shot generators.
///
/// The ChaCha key is built from `(seed, experiment, setting)` and the shot index
/// selects the ChaCha stream, so distinct ids never share keystream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrajectoryRng {
    seed: u64,
}

impl TrajectoryRng {
    pub fn new(seed: u64) -> Self {
        TrajectoryRng { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self, id: StreamId) -> ChaCha8Rng {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&self.seed.to_le_bytes());
        key[8..16].copy_from_slice(&id.experiment.to_le_bytes());
        key[16..24].copy_from_slice(&id.setting.to_le_bytes());
        key[24] = 0xA5;
        let mut rng = ChaCha8Rng::from_seed(key);
        rng.set_stream(id.shot);
        rng
    }
}

#[derive(Clone, Copy, Debug)]
enum ErrorSite {
    /// Random X, Y or Z on a qubit.
    Depolarize1 {
        q: usize,
        p: f64,
    },
    /// One of the 15 non-identity two-qubit Paulis.
    Depolarize2 {
        a: usize,
        b: usize,
        p: f64,
    },
    /// `X (x) X` on a pair.
    BitFlipPair {
        a: usize,
        b: usize,
        p: f64,
    },
    Dephase {
        q: usize,
        p: f64,
    },
}

/// Pauli masks `(x, z)` accumulated after one layer.
type Fault = (u64, u64);

fn pauli_bits(code: u32) -> (u64, u64) {
    // 1 = X, 2 = Y, 3 = Z
    match code {
        1 => (1, 0),
        2 => (1, 1),
        3 => (0, 1),
        _ => (0, 0),
    }
}

impl ErrorSite {
    fn draw<R: Rng + ?Sized>(&self, rng: &mut R, fault: &mut Fault) {
        match *self {
            ErrorSite::Depolarize1 { q, p } => {
                if rng.gen::<f64>() < p {
                    let (x, z) = pauli_bits(rng.gen_range(1..4));
                    fault.0 ^= x << q;
                    fault.1 ^= z << q;
                }
            }
            ErrorSite::Depolarize2 { a, b, p } => {
                if rng.gen::<f64>() < p {
                    let k = rng.gen_range(1..16u32);
                    let (xa, za) = pauli_bits(k & 3);
                    let (xb, zb) = pauli_bits(k >> 2);
                    fault.0 ^= (xa << a) | (xb << b);
                    fault.1 ^= (za << a) | (zb << b);
                }
            }
            ErrorSite::BitFlipPair { a, b, p } => {
                if rng.gen::<f64>() < p {
                    fault.0 ^= (1 << a) | (1 << b);
                }
            }
            ErrorSite::Dephase { q, p } => {
                if rng.gen::<f64>() < p {
                    fault.1 ^= 1 << q;
                }
            }
        }
    }
}

fn layer_sites(circuit: &Circuit, noise: &NoiseParams, l: usize) -> Vec<ErrorSite> {
    let n = circuit.n();
    let layer = &circuit.layers()[l];
    let mut sites = Vec::new();
    for g in layer {
        match *g {
            GateOp::Cz { a, b } | GateOp::Rxx { a, b, .. } => {
                sites.push(ErrorSite::Depolarize2 { a, b, p: noise.p2d });
                sites.push(ErrorSite::BitFlipPair { a, b, p: noise.p2xx });
                if matches!(g, GateOp::Rxx { .. }) {
                    for (c, d) in noise.crosstalk_for(a, b, n) {
                        if c < n && d < n && c != d {
                            sites.push(ErrorSite::BitFlipPair { a: c, b: d, p: noise.pc });
                        }
                    }
                }
            }
            _ => sites.push(ErrorSite::Depolarize1 { q: g.targets()[0], p: noise.p1d }),
        }
    }
    let p_idle = noise.p_idle(circuit.layer_time(l, noise.t1, noise.t2));
    for q in circuit.idle_qubits(l) {
        sites.push(ErrorSite::Dephase { q, p: p_idle });
    }
    sites.retain(|s| match *s {
        ErrorSite::Depolarize1 { p, .. }
        | ErrorSite::Depolarize2 { p, .. }
        | ErrorSite::BitFlipPair { p, .. }
        | ErrorSite::Dephase { p, .. } => p > 0.0,
    });
    sites
}

/// Stochastic Pauli-trajectory sampler for one circuit under one noise model.
///
/// Ideal states after every layer are cached, so a shot only re-simulates from
/// its first faulty layer; faults after the last layer act on the outcome bits.
#[derive(Clone, Debug)]
pub struct TrajectorySampler<T: Real> {
    circuit: Circuit,
    sites: Vec<Vec<ErrorSite>>,
    ideal: Vec<StateVector<T>>,
    ideal_dist: WeightedIndex<f64>,
}

impl<T: Real> TrajectorySampler<T> {
    pub fn new(circuit: &Circuit, noise: &NoiseParams) -> Result<Self, SimError> {
        noise.validate()?;
        let mut state = StateVector::<T>::zero(circuit.n())?;
        let mut ideal = Vec::with_capacity(circuit.depth() + 1);
        ideal.push(state.clone());
        for layer in circuit.layers() {
            for g in layer {
                state.apply_gate(g)?;
            }
            ideal.push(state.clone());
        }
        let weights: Vec<f64> = state.probabilities().iter().map(|p| p.as_f64()).collect();
        let ideal_dist = WeightedIndex::new(&weights).map_err(|e| SimError::Sampling(e.to_string()))?;
        let sites = (0..circuit.depth()).map(|l| layer_sites(circuit, noise, l)).collect();
        Ok(TrajectorySampler { circuit: circuit.clone(), sites, ideal, ideal_dist })
    }

    pub fn circuit(&self) -> &Circuit {
        &self.circuit
    }

    fn draw_faults<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<Fault> {
        self.sites
            .iter()
            .map(|layer| {
                let mut f = (0, 0);
                for s in layer {
                    s.draw(rng, &mut f);
                }
                f
            })
            .collect()
    }

    /// State after all layers but the last fault, or `None` if it equals the ideal one.
    fn evolve(&self, faults: &[Fault]) -> Option<StateVector<T>> {
        let depth = self.circuit.depth();
        let first = faults[..depth.saturating_sub(1)].iter().position(|&(x, z)| x | z != 0)?;
        let mut state = self.ideal[first + 1].clone();
        let (x, z) = faults[first];
        state.apply_pauli_masks(x, z);
        for (l, layer) in self.circuit.layers().iter().enumerate().skip(first + 1) {
            for g in layer {
                state.apply_gate(g).expect("validated circuit");
            }
            if l + 1 < depth {
                let (x, z) = faults[l];
                state.apply_pauli_masks(x, z);
            }
        }
        Some(state)
    }

    /// One noisy computational-basis outcome.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> BinaryVector {
        let n = self.circuit.n();
        let faults = self.draw_faults(rng);
        let flip = faults.last().map_or(0, |f| f.0);
        let index = match self.evolve(&faults) {
            None => self.ideal_dist.sample(rng),
            Some(state) => state.sample_index_with(rng.gen::<f64>()),
        };
        BinaryVector::from_bits(n, index as u64 ^ flip)
    }

    /// Final state of one trajectory, all faults applied.
    pub fn final_state<R: Rng + ?Sized>(&self, rng: &mut R) -> StateVector<T> {
        let faults = self.draw_faults(rng);
        let mut state = self.evolve(&faults).unwrap_or_else(|| self.ideal[self.circuit.depth()].clone());
        if let Some(&(x, z)) = faults.last() {
            state.apply_pauli_masks(x, z);
        }
        state
    }

    /// Shots `0..shots` of setting `setting`, each on its own stream.
    pub fn sample_many(&self, rng: &TrajectoryRng, experiment: u64, setting: u64, shots: usize) -> Vec<BinaryVector> {
        (0..shots as u64)
            .into_par_iter()
            .map(|shot| self.sample(&mut rng.stream(StreamId { experiment, setting, shot })))
            .collect()
    }

    pub fn tally(
        &self,
        rng: &TrajectoryRng,
        experiment: u64,
        setting: u64,
        shots: usize,
    ) -> BTreeMap<BinaryVector, u64> {
        let mut counts = BTreeMap::new();
        for b in self.sample_many(rng, experiment, setting, shots) {
            *counts.entry(b).or_insert(0) += 1;
        }
        counts
    }
}

/// Sampler for measuring the prepared state in `bases` under `noise`.
pub fn noisy_sampler<T: Real>(
    prep: &Circuit,
    noise: &NoiseParams,
    bases: &[Basis],
) -> Result<TrajectorySampler<T>, SimError> {
    TrajectorySampler::new(&measurement_circuit(prep, bases)?, noise)
}

/// A single noisy shot; build a [`TrajectorySampler`] when drawing many.
pub fn noisy_shot<R: Rng + ?Sized>(
    prep: &Circuit,
    noise: &NoiseParams,
    bases: &[Basis],
    rng: &mut R,
) -> Result<BinaryVector, SimError> {
    Ok(noisy_sampler::<f64>(prep, noise, bases)?.sample(rng))
}

/// Trajectory-averaged odd-parity population after one noisy `RXX(pi/4)` on `|00>`.
///
/// Returns the mean and its standard error.
pub fn rxx_parity_population(
    noise: &NoiseParams,
    trajectories: usize,
    rng: &TrajectoryRng,
    experiment: u64,
) -> Result<(f64, f64), SimError> {
    if trajectories == 0 {
        return Err(SimError::InvalidShots);
    }
    let mut c = Circuit::new(2);
    c.push_layer(vec![GateOp::Rxx { a: 0, b: 1, theta: std::f64::consts::FRAC_PI_4 }])?;
    let sampler = TrajectorySampler::<f64>::new(&c, noise)?;
    let values: Vec<f64> = (0..trajectories as u64)
        .into_par_iter()
        .map(|shot| {
            let s = sampler.final_state(&mut rng.stream(StreamId { experiment, setting: 0, shot }));
            super::state::parity_population_a(&s, 0, 1)
        })
        .collect();
    let m = trajectories as f64;
    let mean = values.iter().sum::<f64>() / m;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1.0).max(1.0);
    Ok((mean, (var / m).sqrt()))
}
