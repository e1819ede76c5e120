use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BoundsError, GeometricCircuitStrategy, OutputFunction};
use crate::games::GameInstance;
use crate::gf2::{Gf2Solution, Gf2System};
use crate::pauli_core::BinaryVector;
use crate::Rational;

/// Maximum number of strategy-input evaluations an exhaustive search may perform.
pub const SEARCH_LIMIT: u64 = 1_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundMethod {
    /// Every assignment of the relevant truth-table entries was scored.
    Exhaustive,
    /// The win constraints of all inputs were solved jointly over F2.
    Linear,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub game: String,
    pub depth: usize,
    #[serde(with = "ratio_fields")]
    pub beta: Rational,
    pub wins: usize,
    pub inputs: usize,
    pub witness: GeometricCircuitStrategy,
    pub method: BoundMethod,
    /// Number of strategies in the reduced space (may exceed `u64`).
    pub search_size: f64,
    pub seconds: f64,
}

mod ratio_fields {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::Rational;

    #[derive(Serialize, Deserialize)]
    struct Fields {
        num: i64,
        den: i64,
    }

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        Fields { num: *r.numer(), den: *r.denom() }.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let f = Fields::deserialize(d)?;
        if f.den == 0 {
            return Err(serde::de::Error::custom("zero denominator"));
        }
        Ok(Rational::new(f.num, f.den))
    }
}

/// Truth-table entries that can influence the referee.
///
/// Output `j` reads the party bits in its light cone that vary over the input set;
/// an entry is a variable only if its view occurs on an input where `j` lies in
/// the support of some win constraint.
struct Reduced {
    positions: Vec<Vec<usize>>,
    vars: Vec<BTreeMap<usize, usize>>,
    count: usize,
    /// Per input: constraints as (variables, parity).
    constraints: Vec<Vec<(Vec<usize>, bool)>>,
}

impl Reduced {
    fn new(game: &GameInstance, depth: usize) -> Reduced {
        let n = game.n();
        let l = game.bits_per_party();
        let bits: Vec<_> = game.inputs().iter().map(|x| game.party_bits(x)).collect();
        let varying = bits.iter().fold(BinaryVector::zeros(n * l), |acc, b| acc | (*b ^ bits[0]));
        let graph = game.graph();
        let positions: Vec<Vec<usize>> = (0..n)
            .map(|j| (0..n * l).filter(|&p| varying.get(p) && graph.distance(p / l, j) <= depth).collect())
            .collect();
        let view = |j: usize, i: usize| {
            positions[j].iter().enumerate().fold(0usize, |acc, (k, &p)| acc | (bits[i].get(p) as usize) << k)
        };
        let mut vars: Vec<BTreeMap<usize, usize>> = vec![BTreeMap::new(); n];
        for i in 0..game.inputs().len() {
            for c in game.constraints(i) {
                for j in c.mask.ones_indices() {
                    vars[j].entry(view(j, i)).or_insert(0);
                }
            }
        }
        let mut count = 0;
        for m in vars.iter_mut() {
            for v in m.values_mut() {
                *v = count;
                count += 1;
            }
        }
        let constraints = (0..game.inputs().len())
            .map(|i| {
                game.constraints(i)
                    .into_iter()
                    .map(|c| (c.mask.ones_indices().into_iter().map(|j| vars[j][&view(j, i)]).collect(), c.parity))
                    .collect()
            })
            .collect();
        Reduced { positions, vars, count, constraints }
    }

    fn strategy(&self, game: &GameInstance, depth: usize, value: impl Fn(usize) -> bool) -> GeometricCircuitStrategy {
        let l = game.bits_per_party();
        let outputs = (0..game.n())
            .map(|j| {
                let k = self.positions[j].len();
                let table = (0..1usize << k).map(|v| self.vars[j].get(&v).is_some_and(|&u| value(u))).collect();
                OutputFunction { inputs: self.positions[j].clone(), table }
            })
            .collect();
        GeometricCircuitStrategy { n: game.n(), depth, fan_in: 3 * l, bits_per_party: l, outputs }
    }
}

/// Exact optimum of deterministic depth-`depth` strategies on `game`.
///
/// Small reduced spaces are searched exhaustively, ties going to the
/// lexicographically first list of truth tables. Otherwise the joint F2 system is
/// solved: a solution is a perfect strategy, and without one the search is refused.
pub fn bound(game: &GameInstance, depth: usize) -> Result<BoundResult, BoundsError> {
    let start = Instant::now();
    let reduced = Reduced::new(game, depth);
    let m = game.inputs().len();
    let size = 2f64.powi(reduced.count as i32);
    let finish = |wins: usize, witness: GeometricCircuitStrategy, method| BoundResult {
        game: game.label(),
        depth,
        beta: Rational::new(wins as i64, m as i64),
        wins,
        inputs: m,
        witness,
        method,
        search_size: size,
        seconds: start.elapsed().as_secs_f64(),
    };
    if size * m as f64 <= SEARCH_LIMIT as f64 {
        let (wins, a) = exhaustive(&reduced);
        let nv = reduced.count;
        let witness = reduced.strategy(game, depth, |u| (a >> (nv - 1 - u)) & 1 == 1);
        return Ok(finish(wins, witness, BoundMethod::Exhaustive));
    }
    let mut system = Gf2System::new(reduced.count);
    for cs in &reduced.constraints {
        for (vars, parity) in cs {
            system.push(vars.iter().copied(), *parity);
        }
    }
    match system.solve() {
        Gf2Solution::Consistent { assignment, .. } => {
            let witness = reduced.strategy(game, depth, |u| assignment[u]);
            Ok(finish(m, witness, BoundMethod::Linear))
        }
        Gf2Solution::Inconsistent { .. } => {
            Err(BoundsError::SearchTooLarge { strategies: size, inputs: m, limit: SEARCH_LIMIT })
        }
    }
}

/// Best `(wins, assignment)`; variable `u` is bit `count - 1 - u`, so numeric
/// order of assignments is lexicographic order of the tables.
fn exhaustive(reduced: &Reduced) -> (usize, u64) {
    let nv = reduced.count;
    let masks: Vec<Vec<(u64, u32)>> = reduced
        .constraints
        .iter()
        .map(|cs| {
            cs.iter().map(|(vars, p)| (vars.iter().fold(0u64, |acc, &u| acc | 1 << (nv - 1 - u)), *p as u32)).collect()
        })
        .collect();
    let score = |a: u64| masks.iter().filter(|cs| cs.iter().all(|&(mk, p)| (a & mk).count_ones() & 1 == p)).count();
    let total = 1u64 << nv;
    let chunk = (total / 64).max(1);
    (0..total.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut best = (0usize, c * chunk);
            for a in c * chunk..((c + 1) * chunk).min(total) {
                let w = score(a);
                if w > best.0 {
                    best = (w, a);
                }
            }
            best
        })
        .reduce(|| (0, u64::MAX), |x, y| if y.0 > x.0 || (y.0 == x.0 && y.1 < x.1) { y } else { x })
}

pub fn depth0_bound(game: &GameInstance) -> Result<BoundResult, BoundsError> {
    bound(game, 0)
}

pub fn depth1_bound(game: &GameInstance) -> Result<BoundResult, BoundsError> {
    bound(game, 1)
}
