use serde::{Deserialize, Serialize};

use super::{BoundsError, GeometricCircuitStrategy, OutputFunction};
use crate::games::{GameInstance, GameKind, InputSetKind};
use crate::gf2::{Gf2Solution, Gf2System};

/// Algebraic normal form of one output over the varying input bits it can see.
///
/// `coefficients[S]` multiplies the monomial `prod_{k in S} x_{inputs[k]}`; with at
/// most two visible bits this is `alpha + beta x_a + gamma x_b + delta x_a x_b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputAnf {
    pub inputs: Vec<usize>,
    pub coefficients: Vec<bool>,
}

impl OutputAnf {
    fn truth_table(&self) -> Vec<bool> {
        (0..self.coefficients.len())
            .map(|v| (0..self.coefficients.len()).filter(|&s| s & !v == 0 && self.coefficients[s]).count() % 2 == 1)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AffineStrategyParams {
    pub n: usize,
    pub depth: usize,
    pub outputs: Vec<OutputAnf>,
}

impl AffineStrategyParams {
    pub fn into_strategy(self) -> GeometricCircuitStrategy {
        let outputs =
            self.outputs.iter().map(|o| OutputFunction { inputs: o.inputs.clone(), table: o.truth_table() }).collect();
        GeometricCircuitStrategy { n: self.n, depth: self.depth, fan_in: 3, bits_per_party: 1, outputs }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum ObstructionResult {
    /// The win constraints cannot all hold. `contradiction` lists the
    /// `(input, constraint support)` pairs whose sum reads `0 = 1`.
    Inconsistent {
        unknowns: usize,
        equations: usize,
        rank: usize,
        augmented_rank: usize,
        contradiction: Vec<(String, String)>,
    },
    Counterexample(AffineStrategyParams),
}

/// Decides whether a depth-`D` geometric strategy can win every input of
/// `SS(C_{6D}, HLFn5)`.
///
/// Each output is written in ANF over the varying bits of its light cone, so every
/// win constraint becomes an affine equation in the ANF coefficients.
pub fn parity_obstruction_check(n: usize, depth: usize) -> Result<ObstructionResult, BoundsError> {
    if depth == 0 || depth.is_multiple_of(2) || n != 6 * depth {
        return Err(BoundsError::InvalidParameters(format!("need odd D and n = 6D, got n = {n}, D = {depth}")));
    }
    let game = GameInstance::build(GameKind::Ss, InputSetKind::Hlfn5, n)?;
    let varying = game.input_set().varying_positions().ones_indices();
    let graph = game.graph();
    let visible: Vec<Vec<usize>> =
        (0..n).map(|j| varying.iter().copied().filter(|&p| graph.distance(p, j) <= depth).collect()).collect();
    let mut offset = Vec::with_capacity(n);
    let mut unknowns = 0;
    for v in &visible {
        debug_assert!(v.len() <= 2);
        offset.push(unknowns);
        unknowns += 1 << v.len();
    }
    let mut system = Gf2System::new(unknowns);
    let mut labels = Vec::new();
    for (i, x) in game.inputs().iter().enumerate() {
        for c in game.constraints(i) {
            let mut terms = Vec::new();
            for j in c.mask.ones_indices() {
                let on = visible[j].iter().enumerate().fold(0usize, |acc, (k, &p)| acc | (x.get(p) as usize) << k);
                // Monomials that evaluate to 1 at x: subsets of the visible ones.
                terms.extend((0..1usize << visible[j].len()).filter(|s| s & !on == 0).map(|s| offset[j] + s));
            }
            system.push(terms, c.parity);
            labels.push((x.to_string(), c.mask.to_string()));
        }
    }
    Ok(match system.solve() {
        Gf2Solution::Inconsistent { rank, augmented_rank, contradiction } => ObstructionResult::Inconsistent {
            unknowns,
            equations: system.equations(),
            rank,
            augmented_rank,
            contradiction: contradiction.into_iter().map(|r| labels[r].clone()).collect(),
        },
        Gf2Solution::Consistent { assignment, .. } => {
            let outputs = visible
                .iter()
                .enumerate()
                .map(|(j, v)| OutputAnf {
                    inputs: v.clone(),
                    coefficients: assignment[offset[j]..offset[j] + (1 << v.len())].to_vec(),
                })
                .collect();
            ObstructionResult::Counterexample(AffineStrategyParams { n, depth, outputs })
        }
    })
}
