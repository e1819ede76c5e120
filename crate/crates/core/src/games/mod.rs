//! CBF and SS games on the cycle: input sets, referees, the quantum strategy and
//! the Bell-operator form of the success probability.

mod bell;
mod quantum;

pub use bell::{bell_operator, bell_success_probability, bell_success_probability_with_inputs, BellOperator};
pub use quantum::{
    play_quantum, quantum_success, InputResult, PlayOutcome, RoundRecord, SuccessEstimate, QUANTUM_STRATEGY,
};

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graphsim::{Basis, SimError};
use crate::pauli_core::{cycle_stabilizer, BinaryVector, CycleGraph, PauliError, PauliOperator, Sign, StabilizerGroup};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GameError {
    #[error("input set {kind} is not defined for n = {n}")]
    UnsupportedInputSet { kind: String, n: usize },
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("duplicate input {0}")]
    DuplicateInput(BinaryVector),
    #[error("no expectation value supplied for {0}")]
    MissingExpectation(PauliOperator),
    #[error("unknown {what} \"{value}\"")]
    Parse { what: &'static str, value: String },
    #[error(transparent)]
    Pauli(#[from] PauliError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    Cbf,
    Ss,
}

impl GameKind {
    /// Input bits per party.
    pub fn bits_per_party(self) -> usize {
        match self {
            GameKind::Cbf => 2,
            GameKind::Ss => 1,
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GameKind::Cbf => "CBF",
            GameKind::Ss => "SS",
        })
    }
}

impl FromStr for GameKind {
    type Err = GameError;
    fn from_str(s: &str) -> Result<Self, GameError> {
        match s.to_ascii_lowercase().as_str() {
            "cbf" => Ok(GameKind::Cbf),
            "ss" => Ok(GameKind::Ss),
            _ => Err(GameError::Parse { what: "game", value: s.to_string() }),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputSetKind {
    Full,
    Mermin55,
    Hlf8,
    Hlf5,
    Hlfn5,
    Custom(Vec<BinaryVector>),
}

impl fmt::Display for InputSetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InputSetKind::Full => f.write_str("full"),
            InputSetKind::Mermin55 => f.write_str("mermin55"),
            InputSetKind::Hlf8 => f.write_str("hlf8"),
            InputSetKind::Hlf5 => f.write_str("hlf5"),
            InputSetKind::Hlfn5 => f.write_str("hlfn5"),
            InputSetKind::Custom(v) => write!(f, "custom({})", v.len()),
        }
    }
}

impl FromStr for InputSetKind {
    type Err = GameError;
    fn from_str(s: &str) -> Result<Self, GameError> {
        match s.to_ascii_lowercase().as_str() {
            "full" => Ok(InputSetKind::Full),
            "mermin55" => Ok(InputSetKind::Mermin55),
            "hlf8" => Ok(InputSetKind::Hlf8),
            "hlf5" => Ok(InputSetKind::Hlf5),
            "hlfn5" => Ok(InputSetKind::Hlfn5),
            _ => Err(GameError::Parse { what: "input set", value: s.to_string() }),
        }
    }
}

/// Materialized input set, sorted by bitstring unless custom.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputSet {
    pub kind: InputSetKind,
    pub n: usize,
    pub inputs: Vec<BinaryVector>,
}

impl InputSet {
    pub fn len(&self) -> usize {
        self.inputs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inputs.is_empty()
    }

    /// Positions where not every input is zero.
    pub fn varying_positions(&self) -> BinaryVector {
        self.inputs.iter().fold(BinaryVector::zeros(self.n), |acc, x| acc | *x)
    }
}

/// Triples `(x_0, x_2, x_4)` allowed in the five-input sets.
const HLF5_PATTERNS: [[bool; 3]; 5] =
    [[false, false, false], [false, true, true], [true, false, true], [true, true, false], [true, true, true]];

pub fn build_input_set(kind: InputSetKind, n: usize) -> Result<InputSet, GameError> {
    let unsupported = || GameError::UnsupportedInputSet { kind: kind.to_string(), n };
    let needs_six = matches!(kind, InputSetKind::Mermin55 | InputSetKind::Hlf8 | InputSetKind::Hlf5);
    if needs_six && n != 6 {
        return Err(unsupported());
    }
    let place = |positions: [usize; 3], bits: [bool; 3]| {
        let mut x = BinaryVector::zeros(n);
        for (p, b) in positions.into_iter().zip(bits) {
            x.set(p, b);
        }
        x
    };
    let mut inputs: Vec<BinaryVector> = match &kind {
        InputSetKind::Full => {
            if !(3..=20).contains(&n) {
                return Err(unsupported());
            }
            BinaryVector::all(n).collect()
        }
        InputSetKind::Mermin55 => {
            let excluded: [BinaryVector; 2] = ["010101".parse()?, "101010".parse()?];
            BinaryVector::all(6).filter(|x| x.weight() > 1 && !excluded.contains(x)).collect()
        }
        InputSetKind::Hlf8 => (0..8u8).map(|k| place([0, 2, 4], [k & 1 == 1, k & 2 == 2, k & 4 == 4])).collect(),
        InputSetKind::Hlf5 => HLF5_PATTERNS.iter().map(|&b| place([0, 2, 4], b)).collect(),
        InputSetKind::Hlfn5 => {
            if n < 6 || n % 2 == 1 || n > crate::pauli_core::MAX_QUBITS {
                return Err(unsupported());
            }
            let positions = [0, 2 * (n / 6), 2 * (n / 3)];
            HLF5_PATTERNS.iter().map(|&b| place(positions, b)).collect()
        }
        InputSetKind::Custom(list) => {
            if n < 3 {
                return Err(unsupported());
            }
            let mut seen = HashSet::new();
            for x in list {
                if x.len() != n {
                    return Err(GameError::LengthMismatch { expected: n, found: x.len() });
                }
                if !seen.insert(*x) {
                    return Err(GameError::DuplicateInput(*x));
                }
            }
            list.clone()
        }
    };
    if !matches!(kind, InputSetKind::Custom(_)) {
        inputs.sort();
    }
    Ok(InputSet { kind, n, inputs })
}

/// `sum_{j in mask} y_j = parity (mod 2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ParityConstraint {
    pub mask: BinaryVector,
    pub parity: bool,
}

impl ParityConstraint {
    pub fn holds(&self, y: &BinaryVector) -> bool {
        self.mask.dot(y) == self.parity
    }
}

fn check_len(n: usize, v: &BinaryVector) -> Result<(), GameError> {
    if v.len() != n {
        return Err(GameError::LengthMismatch { expected: n, found: v.len() });
    }
    Ok(())
}

/// Party inputs `s_j = (x_j, x_{j-1} + x_{j+1})`.
pub fn cbf_local_inputs(x: &BinaryVector) -> Vec<(bool, bool)> {
    let nb = x.cyclic_prev() ^ x.cyclic_next();
    (0..x.len()).map(|j| (x.get(j), nb.get(j))).collect()
}

/// Win iff the output parity over `supp(s)` equals `g_n(x)`.
pub fn cbf_referee(x: &BinaryVector, y: &BinaryVector) -> Result<bool, GameError> {
    check_len(x.len(), y)?;
    let s = cycle_stabilizer(x.len(), x)?;
    let c = ParityConstraint { mask: s.support(), parity: s.sign() == Some(Sign::Minus) };
    Ok(c.holds(y))
}

/// Win iff every member of `P_x` has output parity matching its sign.
pub fn ss_referee(group: &StabilizerGroup, x: &BinaryVector, y: &BinaryVector) -> Result<bool, GameError> {
    check_len(group.n(), y)?;
    Ok(group
        .stabilizer_submeasurements(x)?
        .iter()
        .all(|(p, s)| ParityConstraint { mask: p.support(), parity: s.is_minus() }.holds(y)))
}

/// A game: graph size, kind and input set, with per-input win conditions precomputed.
#[derive(Clone, Debug)]
pub struct GameInstance {
    n: usize,
    kind: GameKind,
    inputs: InputSet,
    graph: CycleGraph,
    group: StabilizerGroup,
    terms: Vec<Vec<(PauliOperator, Sign)>>,
}

impl GameInstance {
    pub fn new(kind: GameKind, inputs: InputSet) -> Result<Self, GameError> {
        let n = inputs.n;
        let graph = CycleGraph::new(n)?;
        let group = StabilizerGroup::cycle(&graph);
        let mut terms = Vec::with_capacity(inputs.len());
        for x in &inputs.inputs {
            terms.push(Self::terms_for(kind, &group, x)?);
        }
        Ok(GameInstance { n, kind, inputs, graph, group, terms })
    }

    pub fn build(kind: GameKind, set: InputSetKind, n: usize) -> Result<Self, GameError> {
        Self::new(kind, build_input_set(set, n)?)
    }

    fn terms_for(
        kind: GameKind,
        group: &StabilizerGroup,
        x: &BinaryVector,
    ) -> Result<Vec<(PauliOperator, Sign)>, GameError> {
        match kind {
            GameKind::Ss => Ok(group.stabilizer_submeasurements(x)?),
            GameKind::Cbf => {
                let s = cycle_stabilizer(x.len(), x)?;
                let mut t = vec![(PauliOperator::identity(x.len()), Sign::Plus)];
                if !s.is_identity() {
                    t.push((s.unsigned(), s.sign().expect("group elements are Hermitian")));
                }
                Ok(t)
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> GameKind {
        self.kind
    }

    pub fn input_set(&self) -> &InputSet {
        &self.inputs
    }

    pub fn inputs(&self) -> &[BinaryVector] {
        &self.inputs.inputs
    }

    pub fn graph(&self) -> &CycleGraph {
        &self.graph
    }

    pub fn group(&self) -> &StabilizerGroup {
        &self.group
    }

    pub fn bits_per_party(&self) -> usize {
        self.kind.bits_per_party()
    }

    pub fn label(&self) -> String {
        format!("{}(C{}, {})", self.kind, self.n, self.inputs.kind)
    }

    /// Signed operators whose correlations decide input `index` (identity included).
    pub fn terms(&self, index: usize) -> &[(PauliOperator, Sign)] {
        &self.terms[index]
    }

    /// Non-trivial parity constraints for input `index`.
    pub fn constraints(&self, index: usize) -> Vec<ParityConstraint> {
        self.terms[index]
            .iter()
            .filter(|(p, _)| !p.is_identity())
            .map(|(p, s)| ParityConstraint { mask: p.support(), parity: s.is_minus() })
            .collect()
    }

    pub fn wins_at(&self, index: usize, y: &BinaryVector) -> bool {
        self.terms[index].iter().all(|(p, s)| p.support().dot(y) == s.is_minus())
    }

    /// Referee for an arbitrary input (not necessarily in the set).
    pub fn referee(&self, x: &BinaryVector, y: &BinaryVector) -> Result<bool, GameError> {
        check_len(self.n, x)?;
        match self.kind {
            GameKind::Cbf => cbf_referee(x, y),
            GameKind::Ss => ss_referee(&self.group, x, y),
        }
    }

    /// Per-qubit measurement basis of the quantum strategy on input `x`.
    pub fn measurement_bases(&self, x: &BinaryVector) -> Vec<Basis> {
        match self.kind {
            GameKind::Ss => x.iter().map(|b| if b { Basis::Y } else { Basis::X }).collect(),
            GameKind::Cbf => cbf_local_inputs(x)
                .into_iter()
                .map(|s| match s {
                    (false, _) => Basis::Z,
                    (true, false) => Basis::X,
                    (true, true) => Basis::Y,
                })
                .collect(),
        }
    }

    /// Input bits seen by the parties: party `j` holds bits `j*l .. (j+1)*l`.
    pub fn party_bits(&self, x: &BinaryVector) -> BinaryVector {
        match self.kind {
            GameKind::Ss => *x,
            GameKind::Cbf => {
                let mut out = BinaryVector::zeros(2 * self.n);
                for (j, (a, b)) in cbf_local_inputs(x).into_iter().enumerate() {
                    out.set(2 * j, a);
                    out.set(2 * j + 1, b);
                }
                out
            }
        }
    }
}
