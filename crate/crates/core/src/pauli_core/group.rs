use serde::{Deserialize, Serialize};

use super::{BinaryVector, PauliError, PauliOperator, Sign, MAX_QUBITS};

/// The `n`-vertex cycle with edges `(j, j+1 mod n)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct CycleGraph {
    n: usize,
}

impl CycleGraph {
    pub fn new(n: usize) -> Result<Self, PauliError> {
        if n < 3 {
            return Err(PauliError::InvalidGraph(n));
        }
        if n > MAX_QUBITS {
            return Err(PauliError::TooManyQubits(n));
        }
        Ok(CycleGraph { n })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn prev(&self, j: usize) -> usize {
        (j + self.n - 1) % self.n
    }

    pub fn next(&self, j: usize) -> usize {
        (j + 1) % self.n
    }

    pub fn neighbors(&self, j: usize) -> [usize; 2] {
        [self.prev(j), self.next(j)]
    }

    /// Edges `(j, j+1)` for `j = 0..n`, wrapping at the end.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n).map(|j| (j, self.next(j))).collect()
    }

    /// Graph distance on the cycle.
    pub fn distance(&self, i: usize, j: usize) -> usize {
        let d = i.abs_diff(j) % self.n;
        d.min(self.n - d)
    }
}

/// `g_n(x) = sum_j x_{j-1} x_j x_{j+1} mod 2`.
pub fn cubic_sign(x: &BinaryVector) -> bool {
    (*x & x.cyclic_prev() & x.cyclic_next()).parity()
}

/// Closed form of `prod_j S_j^{x_j}` on the cycle: `(-1)^{g_n(x)} E(x, x_prev + x_next)`.
pub fn cycle_stabilizer(n: usize, x: &BinaryVector) -> Result<PauliOperator, PauliError> {
    CycleGraph::new(n)?;
    if x.len() != n {
        return Err(PauliError::DimensionMismatch { left: n, right: x.len() });
    }
    let z = x.cyclic_prev() ^ x.cyclic_next();
    let op = PauliOperator::weyl(*x, z)?;
    Ok(op.with_sign(Sign::from_parity(cubic_sign(x))))
}

/// Result of a signed membership query.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum Membership {
    Plus,
    Minus,
    NotMember,
}

#[derive(Clone, Debug)]
struct EchelonRow {
    vector: u128,
    combination: u64,
    pivot: u32,
}

/// Abelian group generated by independent, pairwise commuting Paulis.
#[derive(Clone, Debug)]
pub struct StabilizerGroup {
    n: usize,
    generators: Vec<PauliOperator>,
    rows: Vec<EchelonRow>,
}

fn reduce(rows: &[EchelonRow], mut v: u128) -> (u128, u64) {
    let mut combination = 0u64;
    for row in rows {
        if (v >> row.pivot) & 1 == 1 {
            v ^= row.vector;
            combination ^= row.combination;
        }
    }
    (v, combination)
}

impl StabilizerGroup {
    /// Validates commutation and independence, then prepares the elimination basis.
    pub fn from_generators(generators: Vec<PauliOperator>) -> Result<Self, PauliError> {
        let n = generators.first().map(|g| g.n()).unwrap_or(0);
        if generators.len() > MAX_QUBITS {
            return Err(PauliError::TooManyQubits(generators.len()));
        }
        for (i, g) in generators.iter().enumerate() {
            if g.n() != n {
                return Err(PauliError::DimensionMismatch { left: n, right: g.n() });
            }
            if !g.is_hermitian() {
                return Err(PauliError::InvalidGenerators(format!("generator {g} is not Hermitian")));
            }
            for h in &generators[..i] {
                if !g.commutes(h)? {
                    return Err(PauliError::InvalidGenerators(format!("{g} and {h} anticommute")));
                }
            }
        }
        let mut rows: Vec<EchelonRow> = Vec::with_capacity(generators.len());
        for (i, g) in generators.iter().enumerate() {
            let (v, c) = reduce(&rows, g.symplectic_word());
            if v == 0 {
                return Err(PauliError::InvalidGenerators(format!("generator {g} is dependent")));
            }
            rows.push(EchelonRow { vector: v, combination: c ^ (1 << i), pivot: v.trailing_zeros() });
        }
        Ok(StabilizerGroup { n, generators, rows })
    }

    /// Stabilizer group of the cycle graph state, `S_j = Z_{j-1} X_j Z_{j+1}`.
    pub fn cycle(graph: &CycleGraph) -> Self {
        let n = graph.n();
        let gens = (0..n)
            .map(|j| {
                let x = BinaryVector::unit(n, j);
                let z = BinaryVector::from_indices(n, &graph.neighbors(j));
                PauliOperator::weyl(x, z).expect("lengths match")
            })
            .collect();
        Self::from_generators(gens).expect("cycle generators are independent and commute")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn generators(&self) -> &[PauliOperator] {
        &self.generators
    }

    pub fn order_log2(&self) -> usize {
        self.generators.len()
    }

    /// `prod_j S_j^{c_j}` by phase-tracked multiplication in index order.
    pub fn element(&self, combination: &BinaryVector) -> PauliOperator {
        let mut acc = PauliOperator::identity(self.n);
        for j in combination.ones_indices() {
            acc = acc * self.generators[j];
        }
        acc
    }

    /// All group elements, indexed by generator combination.
    pub fn elements(&self) -> impl Iterator<Item = (BinaryVector, PauliOperator)> + '_ {
        BinaryVector::all(self.generators.len()).map(move |c| (c, self.element(&c)))
    }

    fn check_size(&self, p: &PauliOperator) -> Result<(), PauliError> {
        if p.n() != self.n {
            return Err(PauliError::DimensionMismatch { left: self.n, right: p.n() });
        }
        Ok(())
    }

    pub fn membership_with_sign(&self, p: &PauliOperator) -> Result<Membership, PauliError> {
        self.check_size(p)?;
        if !p.is_hermitian() {
            return Ok(Membership::NotMember);
        }
        let (residual, combination) = reduce(&self.rows, p.symplectic_word());
        if residual != 0 {
            return Ok(Membership::NotMember);
        }
        let c = BinaryVector::from_bits(self.generators.len(), combination);
        let element = self.element(&c);
        debug_assert_eq!(element.symplectic_word(), p.symplectic_word());
        Ok(match (4 + p.phase_exp() - element.phase_exp()) % 4 {
            0 => Membership::Plus,
            2 => Membership::Minus,
            _ => Membership::NotMember,
        })
    }

    /// Generator combination whose product equals `p` up to phase.
    pub fn combination(&self, p: &PauliOperator) -> Result<Option<BinaryVector>, PauliError> {
        self.check_size(p)?;
        let (residual, combination) = reduce(&self.rows, p.symplectic_word());
        Ok((residual == 0).then(|| BinaryVector::from_bits(self.generators.len(), combination)))
    }

    /// Members of `+S` and `-S` obtained by replacing factors of `E(1, x)` with identity.
    ///
    /// Returned operators have phase 0 and are paired with their sign; the list is
    /// sorted by the kept-qubit mask (text order), so the identity comes first.
    pub fn stabilizer_submeasurements(&self, x: &BinaryVector) -> Result<Vec<(PauliOperator, Sign)>, PauliError> {
        if x.len() != self.n {
            return Err(PauliError::DimensionMismatch { left: self.n, right: x.len() });
        }
        let n = self.n;
        // Column k: residual of the single-qubit factor of E(1, x) at k.
        let mut pivots: Vec<(u128, u64)> = Vec::new();
        let mut kernel: Vec<u64> = Vec::new();
        for k in 0..n {
            let q = BinaryVector::unit(n, k);
            let factor = PauliOperator::weyl(q, q & *x)?;
            let (mut r, _) = reduce(&self.rows, factor.symplectic_word());
            let mut comb = 1u64 << k;
            for &(pv, pc) in &pivots {
                let bit = pv.trailing_zeros();
                if (r >> bit) & 1 == 1 {
                    r ^= pv;
                    comb ^= pc;
                }
            }
            if r == 0 {
                kernel.push(comb);
            } else {
                // Keep pivot rows reduced against each other so single-pass reduction works.
                let bit = r.trailing_zeros();
                for row in pivots.iter_mut() {
                    if (row.0 >> bit) & 1 == 1 {
                        row.0 ^= r;
                        row.1 ^= comb;
                    }
                }
                pivots.push((r, comb));
            }
        }
        let dim = kernel.len();
        if dim > 30 {
            return Err(PauliError::TooManyQubits(n));
        }
        let mut out = Vec::with_capacity(1 << dim);
        for sel in 0u64..(1 << dim) {
            let mut q = 0u64;
            for (i, &kv) in kernel.iter().enumerate() {
                if (sel >> i) & 1 == 1 {
                    q ^= kv;
                }
            }
            let qv = BinaryVector::from_bits(n, q);
            let p = PauliOperator::weyl(qv, qv & *x)?;
            let sign = match self.membership_with_sign(&p)? {
                Membership::Plus => Sign::Plus,
                Membership::Minus => Sign::Minus,
                Membership::NotMember => unreachable!("kernel element lies in the span"),
            };
            out.push((p, sign));
        }
        out.sort_by_key(|(p, _)| p.support());
        Ok(out)
    }
}

pub fn generators(graph: &CycleGraph) -> StabilizerGroup {
    StabilizerGroup::cycle(graph)
}

pub fn membership_with_sign(group: &StabilizerGroup, p: &PauliOperator) -> Result<Membership, PauliError> {
    group.membership_with_sign(p)
}

pub fn stabilizer_submeasurements(
    group: &StabilizerGroup,
    x: &BinaryVector,
) -> Result<Vec<(PauliOperator, Sign)>, PauliError> {
    group.stabilizer_submeasurements(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bv(s: &str) -> BinaryVector {
        s.parse().unwrap()
    }

    fn c6() -> StabilizerGroup {
        StabilizerGroup::cycle(&CycleGraph::new(6).unwrap())
    }

    #[test]
    fn small_cycles_rejected() {
        assert!(matches!(CycleGraph::new(2), Err(PauliError::InvalidGraph(2))));
        assert!(cycle_stabilizer(2, &bv("11")).is_err());
    }

    #[test]
    fn generator_rendering() {
        let g = c6();
        assert_eq!(g.generators()[5].to_string(), "+ZIIIZX");
        assert_eq!(g.generators()[1].to_string(), "+ZXZIII");
    }

    #[test]
    fn closed_form_examples() {
        let s = |x: &str| cycle_stabilizer(6, &bv(x)).unwrap().to_string();
        assert_eq!(s("111111"), "+XXXXXX");
        assert_eq!(s("000000"), "+IIIIII");
        assert_eq!(s("111100"), "+YXXYZZ");
        assert_eq!(s("001110"), "-IZYXYZ");
    }

    #[test]
    fn membership_examples() {
        let g = c6();
        let m = |s: &str| g.membership_with_sign(&s.parse().unwrap()).unwrap();
        assert_eq!(m("IXIXIX"), Membership::Plus);
        assert_eq!(m("XIYXYI"), Membership::Minus);
        assert_eq!(m("-XIYXYI"), Membership::Plus);
        assert_eq!(m("ZIIIII"), Membership::NotMember);
        assert_eq!(m("+iXXXXXX"), Membership::NotMember);
    }

    #[test]
    fn global_x_submeasurements() {
        let subs = c6().stabilizer_submeasurements(&bv("000000")).unwrap();
        let s: Vec<String> = subs.iter().map(|(p, sg)| format!("{p}{sg:?}")).collect();
        assert_eq!(s, ["+IIIIIIPlus", "+IXIXIXPlus", "+XIXIXIPlus", "+XXXXXXPlus"]);
    }

    #[test]
    fn c3_submeasurements() {
        // S0 S1 S2 = -XXX on the triangle since g_3(111) = 1.
        let g = StabilizerGroup::cycle(&CycleGraph::new(3).unwrap());
        let subs = g.stabilizer_submeasurements(&bv("000")).unwrap();
        assert_eq!(subs.len(), 2);
        assert_eq!(subs[1].0.to_string(), "+XXX");
        assert_eq!(subs[1].1, Sign::Minus);
    }

    #[test]
    fn negative_members() {
        let has = |x: &str, p: &str| {
            c6().stabilizer_submeasurements(&bv(x))
                .unwrap()
                .iter()
                .any(|(q, s)| q.to_string() == p && *s == Sign::Minus)
        };
        assert!(has("001010", "+XIYXYI"));
        assert!(has("101000", "+YXYIXI"));
        assert!(has("101000", "+YIYXXX"));
    }

    #[test]
    fn dependent_generators_rejected() {
        let a: PauliOperator = "XX".parse().unwrap();
        assert!(StabilizerGroup::from_generators(vec![a, a]).is_err());
        let b: PauliOperator = "ZI".parse().unwrap();
        assert!(StabilizerGroup::from_generators(vec![a, b]).is_err());
    }

    #[test]
    fn distance_wraps() {
        let g = CycleGraph::new(6).unwrap();
        assert_eq!(g.distance(0, 5), 1);
        assert_eq!(g.distance(1, 4), 3);
    }
}
