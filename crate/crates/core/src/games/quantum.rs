use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{GameError, GameInstance};
use crate::graphsim::{noisy_sampler, preparation_circuit, NoiseParams, PrepForm, SimError, StreamId, TrajectoryRng};
use crate::pauli_core::BinaryVector;

pub const QUANTUM_STRATEGY: &str = "quantum";

/// One played round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub x: BinaryVector,
    pub y: BinaryVector,
    pub won: bool,
    pub strategy: String,
    pub seed: u64,
    pub stream: StreamId,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputResult {
    pub input: BinaryVector,
    pub shots: u64,
    pub wins: u64,
    pub win_rate: f64,
    pub stderr: f64,
}

/// Uniform average of the per-input win rates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessEstimate {
    pub p_hat: f64,
    pub stderr: f64,
    pub per_input: Vec<InputResult>,
}

impl SuccessEstimate {
    /// Aggregates `(input, shots, wins)` rows; the standard error propagates the
    /// per-input binomial errors.
    pub fn from_counts(rows: impl IntoIterator<Item = (BinaryVector, u64, u64)>) -> Self {
        let per_input: Vec<InputResult> = rows
            .into_iter()
            .map(|(input, shots, wins)| {
                let p = wins as f64 / shots as f64;
                InputResult { input, shots, wins, win_rate: p, stderr: (p * (1.0 - p) / shots as f64).sqrt() }
            })
            .collect();
        let m = per_input.len() as f64;
        let p_hat = per_input.iter().map(|r| r.win_rate).sum::<f64>() / m;
        let stderr = per_input.iter().map(|r| r.stderr * r.stderr).sum::<f64>().sqrt() / m;
        SuccessEstimate { p_hat, stderr, per_input }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlayOutcome {
    pub records: Vec<RoundRecord>,
    pub estimate: SuccessEstimate,
}

fn play(
    game: &GameInstance,
    noise: &NoiseParams,
    shots: usize,
    rng: &TrajectoryRng,
    experiment: u64,
    keep: bool,
) -> Result<(Vec<RoundRecord>, SuccessEstimate), GameError> {
    if shots == 0 {
        return Err(SimError::InvalidShots.into());
    }
    let prep = preparation_circuit(game.graph(), PrepForm::Rxx)?;
    let mut records = Vec::new();
    let mut rows = Vec::with_capacity(game.inputs().len());
    for (i, x) in game.inputs().iter().enumerate() {
        let sampler = noisy_sampler::<f64>(&prep, noise, &game.measurement_bases(x))?;
        let setting = i as u64;
        let outcomes: Vec<(BinaryVector, bool)> = (0..shots as u64)
            .into_par_iter()
            .map(|shot| {
                let y = sampler.sample(&mut rng.stream(StreamId { experiment, setting, shot }));
                (y, game.wins_at(i, &y))
            })
            .collect();
        let wins = outcomes.iter().filter(|o| o.1).count() as u64;
        rows.push((*x, shots as u64, wins));
        if keep {
            records.extend(outcomes.into_iter().enumerate().map(|(shot, (y, won))| RoundRecord {
                x: *x,
                y,
                won,
                strategy: QUANTUM_STRATEGY.to_string(),
                seed: rng.seed(),
                stream: StreamId { experiment, setting, shot: shot as u64 },
            }));
        }
    }
    Ok((records, SuccessEstimate::from_counts(rows)))
}

/// Plays the stabilizer strategy on the `RXX`-compiled cycle state, `shots` rounds per input.
///
/// Input `i` of the set uses setting id `i` and shot `k` uses stream `k`, so results
/// depend only on `(seed, experiment)`.
pub fn play_quantum(
    game: &GameInstance,
    noise: &NoiseParams,
    shots: usize,
    rng: &TrajectoryRng,
    experiment: u64,
) -> Result<PlayOutcome, GameError> {
    let (records, estimate) = play(game, noise, shots, rng, experiment, true)?;
    Ok(PlayOutcome { records, estimate })
}

/// As [`play_quantum`] without retaining the rounds.
pub fn quantum_success(
    game: &GameInstance,
    noise: &NoiseParams,
    shots: usize,
    rng: &TrajectoryRng,
    experiment: u64,
) -> Result<SuccessEstimate, GameError> {
    Ok(play(game, noise, shots, rng, experiment, false)?.1)
}
