//! Classical bounds for the cycle games: exact search over deterministic
//! geometrically local strategies, explicit perfect strategies, and the F2
//! certificate that rules out perfect depth-`D` strategies for the five-input game.

mod obstruction;
mod search;

pub use obstruction::{parity_obstruction_check, AffineStrategyParams, ObstructionResult, OutputAnf};
pub use search::{bound, depth0_bound, depth1_bound, BoundMethod, BoundResult, SEARCH_LIMIT};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::games::{GameError, GameInstance};
use crate::pauli_core::{BinaryVector, CycleGraph};
use crate::Rational;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundsError {
    #[error("search over {strategies} strategies x {inputs} inputs exceeds the limit of {limit} evaluations")]
    SearchTooLarge { strategies: f64, inputs: usize, limit: u64 },
    #[error("output {output} reads input position {position}, outside its depth-{depth} light cone")]
    Geometry { output: usize, position: usize, depth: usize },
    #[error("strategy does not match the game: {0}")]
    Shape(String),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

/// A Boolean function given by its truth table over selected input positions.
///
/// Bit `k` of the table index is the value of input position `inputs[k]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFunction {
    pub inputs: Vec<usize>,
    pub table: Vec<bool>,
}

impl OutputFunction {
    pub fn constant(value: bool) -> Self {
        OutputFunction { inputs: Vec::new(), table: vec![value] }
    }

    pub fn from_fn(inputs: Vec<usize>, f: impl Fn(&[bool]) -> bool) -> Self {
        let k = inputs.len();
        let table = (0..1usize << k)
            .map(|v| {
                let bits: Vec<bool> = (0..k).map(|i| (v >> i) & 1 == 1).collect();
                f(&bits)
            })
            .collect();
        OutputFunction { inputs, table }
    }

    pub fn eval(&self, bits: &BinaryVector) -> bool {
        let v = self.inputs.iter().enumerate().fold(0usize, |acc, (k, &p)| acc | (bits.get(p) as usize) << k);
        self.table[v]
    }
}

/// One deterministic response table per party, indexed by the party's local input.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LocalStrategy {
    pub bits_per_party: usize,
    pub tables: Vec<Vec<bool>>,
}

impl LocalStrategy {
    pub fn into_circuit(self) -> GeometricCircuitStrategy {
        let l = self.bits_per_party;
        let n = self.tables.len();
        let outputs = self
            .tables
            .into_iter()
            .enumerate()
            .map(|(j, table)| OutputFunction { inputs: (j * l..(j + 1) * l).collect(), table })
            .collect();
        GeometricCircuitStrategy { n, depth: 0, fan_in: l, bits_per_party: l, outputs }
    }
}

/// Outputs of a depth-`depth` circuit on the cycle, each a function of the party
/// bits within graph distance `depth` of its party.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GeometricCircuitStrategy {
    pub n: usize,
    pub depth: usize,
    pub fan_in: usize,
    pub bits_per_party: usize,
    pub outputs: Vec<OutputFunction>,
}

impl GeometricCircuitStrategy {
    /// Checks table sizes and that every read position lies in its output's light cone.
    pub fn validate(&self) -> Result<(), BoundsError> {
        if self.outputs.len() != self.n {
            return Err(BoundsError::Shape(format!("{} outputs for {} parties", self.outputs.len(), self.n)));
        }
        let graph = CycleGraph::new(self.n).map_err(GameError::from)?;
        for (j, out) in self.outputs.iter().enumerate() {
            if out.table.len() != 1 << out.inputs.len() {
                return Err(BoundsError::Shape(format!("output {j} has a table of length {}", out.table.len())));
            }
            for &p in &out.inputs {
                let party = p / self.bits_per_party;
                if party >= self.n || graph.distance(party, j) > self.depth {
                    return Err(BoundsError::Geometry { output: j, position: p, depth: self.depth });
                }
            }
        }
        Ok(())
    }

    pub fn outputs_for(&self, party_bits: &BinaryVector) -> BinaryVector {
        let mut y = BinaryVector::zeros(self.n);
        for (j, out) in self.outputs.iter().enumerate() {
            y.set(j, out.eval(party_bits));
        }
        y
    }
}

/// Exact win rate over the game's inputs, plus the number of inputs won.
pub fn evaluate_strategy(
    strategy: &GeometricCircuitStrategy,
    game: &GameInstance,
) -> Result<(Rational, usize), BoundsError> {
    strategy.validate()?;
    if strategy.n != game.n() || strategy.bits_per_party != game.bits_per_party() {
        return Err(BoundsError::Shape(format!("strategy for n = {} does not fit {}", strategy.n, game.label())));
    }
    let wins = game
        .inputs()
        .iter()
        .enumerate()
        .filter(|(i, x)| game.wins_at(*i, &strategy.outputs_for(&game.party_bits(x))))
        .count();
    Ok((Rational::new(wins as i64, game.inputs().len() as i64), wins))
}

/// `y_j = a_{j-1} a_j (b_j + a_{j-1})`, which equals the cubic term `x_{j-1} x_j x_{j+1}`.
pub fn cbf_depth1_perfect_strategy(n: usize) -> Result<GeometricCircuitStrategy, BoundsError> {
    let graph = CycleGraph::new(n).map_err(GameError::from)?;
    let outputs = (0..n)
        .map(|j| {
            let p = graph.prev(j);
            OutputFunction::from_fn(vec![2 * p, 2 * j, 2 * j + 1], |v| v[0] & v[1] & (v[2] ^ v[0]))
        })
        .collect();
    Ok(GeometricCircuitStrategy { n, depth: 1, fan_in: 6, bits_per_party: 2, outputs })
}

/// Depth-`(D+1)` strategy for the five-input game on `C_{6D}`: the three outputs
/// just past the midpoints compute pairwise products, all others output 0.
pub fn ss_depth_plus_one_perfect_strategy(n: usize, depth: usize) -> Result<GeometricCircuitStrategy, BoundsError> {
    if depth == 0 || depth.is_multiple_of(2) || n != 6 * depth {
        return Err(BoundsError::InvalidParameters(format!("need odd D and n = 6D, got n = {n}, D = {depth}")));
    }
    let d = depth;
    let mut outputs = vec![OutputFunction::constant(false); n];
    for (j, a, b) in [(d + 1, 0, 2 * d), (3 * d + 1, 2 * d, 4 * d), ((5 * d + 1) % n, 0, 4 * d)] {
        outputs[j] = OutputFunction::from_fn(vec![a, b], |v| v[0] & v[1]);
    }
    Ok(GeometricCircuitStrategy { n, depth: d + 1, fan_in: 3, bits_per_party: 1, outputs })
}
