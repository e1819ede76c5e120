use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::TomographyError;
use crate::graphsim::{bases_to_string, Basis};
use crate::pauli_core::{locally_commutes, BinaryVector, Pauli, PauliOperator, Sign, StabilizerGroup};

/// A signed Pauli and its diagonal form `omega prod_{j in mask} Z_j` after the
/// clique's basis rotation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlannedStabilizer {
    pub stabilizer: PauliOperator,
    pub omega: Sign,
    pub mask: BinaryVector,
}

impl PlannedStabilizer {
    fn new(p: &PauliOperator) -> Result<Self, TomographyError> {
        let omega = p.sign().ok_or_else(|| TomographyError::InvalidStabilizer(p.to_string()))?;
        Ok(PlannedStabilizer { stabilizer: *p, omega, mask: p.support() })
    }

    /// `omega (-1)^{mask . b}`.
    pub fn value(&self, b: &BinaryVector) -> f64 {
        if self.mask.dot(b) ^ self.omega.is_minus() {
            -1.0
        } else {
            1.0
        }
    }
}

/// Locally commuting stabilizers read out from one global basis pattern.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Clique {
    pub basis: Vec<Basis>,
    pub members: Vec<PlannedStabilizer>,
}

impl Clique {
    pub fn basis_string(&self) -> String {
        bases_to_string(&self.basis)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasurementPlan {
    pub n: usize,
    pub cliques: Vec<Clique>,
}

fn letter_basis(p: Pauli) -> Option<Basis> {
    match p {
        Pauli::I => None,
        Pauli::X => Some(Basis::X),
        Pauli::Y => Some(Basis::Y),
        Pauli::Z => Some(Basis::Z),
    }
}

fn clique_basis(n: usize, members: &[PauliOperator]) -> Vec<Basis> {
    (0..n).map(|j| members.iter().find_map(|m| letter_basis(m.factor(j))).unwrap_or(Basis::Z)).collect()
}

fn check_inputs(stabilizers: &[PauliOperator]) -> Result<usize, TomographyError> {
    let n = stabilizers.first().map(|s| s.n()).ok_or(TomographyError::EmptyPlan)?;
    let mut seen = HashSet::new();
    for s in stabilizers {
        if s.n() != n {
            return Err(TomographyError::DimensionMismatch { expected: n, found: s.n() });
        }
        if !seen.insert(s.unsigned()) {
            return Err(TomographyError::DuplicateStabilizer(s.to_string()));
        }
    }
    Ok(n)
}

impl MeasurementPlan {
    /// Plan from explicit groups; each group must be locally commuting.
    pub fn from_groups(groups: Vec<Vec<PauliOperator>>) -> Result<Self, TomographyError> {
        let all: Vec<PauliOperator> = groups.iter().flatten().copied().collect();
        let n = check_inputs(&all)?;
        let mut cliques = Vec::with_capacity(groups.len());
        for g in groups {
            for (i, a) in g.iter().enumerate() {
                for b in &g[..i] {
                    if !locally_commutes(a, b)? {
                        return Err(TomographyError::NotLocallyCommuting(a.to_string(), b.to_string()));
                    }
                }
            }
            let members = g.iter().map(PlannedStabilizer::new).collect::<Result<_, _>>()?;
            cliques.push(Clique { basis: clique_basis(n, &g), members });
        }
        Ok(MeasurementPlan { n, cliques })
    }

    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn stabilizer_count(&self) -> usize {
        self.cliques.iter().map(|c| c.members.len()).sum()
    }

    pub fn stabilizers(&self) -> impl Iterator<Item = (usize, &PlannedStabilizer)> {
        self.cliques.iter().enumerate().flat_map(|(l, c)| c.members.iter().map(move |m| (l, m)))
    }

    /// SHA-256 over the bases and signed members, hex encoded.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(self.n.to_le_bytes());
        for c in &self.cliques {
            h.update(c.basis_string().as_bytes());
            for m in &c.members {
                h.update(b",");
                h.update(m.stabilizer.to_string().as_bytes());
            }
            h.update(b";");
        }
        hex::encode(h.finalize())
    }
}

/// First-fit cover in order of descending weight, ties broken by the Pauli string.
pub fn greedy_clique_cover(stabilizers: &[PauliOperator]) -> Result<MeasurementPlan, TomographyError> {
    check_inputs(stabilizers)?;
    let mut order: Vec<&PauliOperator> = stabilizers.iter().collect();
    order.sort_by(|a, b| b.weight().cmp(&a.weight()).then_with(|| a.letters().cmp(&b.letters())));
    let mut groups: Vec<Vec<PauliOperator>> = Vec::new();
    for s in order {
        let mut placed = false;
        for g in groups.iter_mut() {
            if g.iter().all(|m| locally_commutes(m, s).unwrap_or(false)) {
                g.push(*s);
                placed = true;
                break;
            }
        }
        if !placed {
            groups.push(vec![*s]);
        }
    }
    MeasurementPlan::from_groups(groups)
}

/// Every non-identity element of the group, ordered by generator combination.
pub fn nontrivial_stabilizers(group: &StabilizerGroup) -> Vec<PauliOperator> {
    group.elements().filter(|(c, _)| !c.is_zero()).map(|(_, p)| p).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli_core::CycleGraph;

    fn op(s: &str) -> PauliOperator {
        s.parse().unwrap()
    }

    #[test]
    fn table_group_is_one_clique() {
        let plan = greedy_clique_cover(&[op("+ZIIIZX"), op("+IZXZII"), op("+ZZXZZX")]).unwrap();
        assert_eq!(plan.len(), 1);
        assert_eq!(plan.cliques[0].basis_string(), "ZZXZZX");
    }

    #[test]
    fn c6_cover_is_valid() {
        let g = StabilizerGroup::cycle(&CycleGraph::new(6).unwrap());
        let plan = greedy_clique_cover(&nontrivial_stabilizers(&g)).unwrap();
        assert_eq!(plan.stabilizer_count(), 63);
        assert!(plan.len() <= 63);
        for c in &plan.cliques {
            for a in &c.members {
                for b in &c.members {
                    assert!(locally_commutes(&a.stabilizer, &b.stabilizer).unwrap());
                }
                for j in 0..6 {
                    let f = a.stabilizer.factor(j);
                    assert!(f == Pauli::I || letter_basis(f) == Some(c.basis[j]));
                }
            }
        }
    }

    #[test]
    fn rejects_bad_groups() {
        assert!(MeasurementPlan::from_groups(vec![vec![op("XI"), op("ZI")]]).is_err());
        assert!(greedy_clique_cover(&[op("XI"), op("-XI")]).is_err());
        assert!(greedy_clique_cover(&[op("iXI")]).is_err());
        assert_eq!(greedy_clique_cover(&[op("XY")]).unwrap().len(), 1);
    }
}
