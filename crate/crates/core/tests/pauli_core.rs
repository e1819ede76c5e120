use num_complex::Complex64;
use proptest::prelude::*;

use cluster_games::pauli_core::{cubic_sign, cycle_stabilizer, Membership, Pauli};
use cluster_games::{BinaryVector, CycleGraph, PauliOperator, Sign, StabilizerGroup};

type Dense = Vec<Vec<Complex64>>;

fn letter_matrix(p: Pauli) -> [[Complex64; 2]; 2] {
    let (o, z, i) = (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0), Complex64::new(0.0, 1.0));
    match p {
        Pauli::I => [[o, z], [z, o]],
        Pauli::X => [[z, o], [o, z]],
        Pauli::Y => [[z, -i], [i, z]],
        Pauli::Z => [[o, z], [z, -o]],
    }
}

/// Dense matrix with qubit `j` as bit `j` of the basis index.
fn dense(p: &PauliOperator) -> Dense {
    let n = p.n();
    let d = 1 << n;
    let phase = Complex64::new(0.0, 1.0).powu(p.phase_exp() as u32);
    let mut m = vec![vec![Complex64::new(0.0, 0.0); d]; d];
    for (r, row) in m.iter_mut().enumerate() {
        for (c, v) in row.iter_mut().enumerate() {
            let mut acc = phase;
            for j in 0..n {
                acc *= letter_matrix(p.factor(j))[(r >> j) & 1][(c >> j) & 1];
            }
            *v = acc;
        }
    }
    m
}

fn matmul(a: &Dense, b: &Dense) -> Dense {
    let d = a.len();
    (0..d).map(|r| (0..d).map(|c| (0..d).map(|k| a[r][k] * b[k][c]).sum()).collect()).collect()
}

fn close(a: &Dense, b: &Dense) -> bool {
    a.iter().flatten().zip(b.iter().flatten()).all(|(x, y)| (x - y).norm() < 1e-12)
}

fn pauli(n: usize) -> impl Strategy<Value = PauliOperator> {
    (prop::collection::vec(0u8..4, n), 0u8..4).prop_map(|(f, ph)| {
        let letters: Vec<Pauli> = f.iter().map(|&k| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][k as usize]).collect();
        PauliOperator::from_factors(&letters).with_phase(ph)
    })
}

fn pair(max: usize) -> impl Strategy<Value = (PauliOperator, PauliOperator)> {
    (1..=max).prop_flat_map(|n| (pauli(n), pauli(n)))
}

proptest! {
    #[test]
    fn product_matches_dense_matrices((a, b) in pair(3)) {
        let p = a.multiply(&b).unwrap();
        prop_assert!(close(&dense(&p), &matmul(&dense(&a), &dense(&b))));
    }

    #[test]
    fn commutation_matches_dense_matrices((a, b) in pair(3)) {
        let ab = matmul(&dense(&a), &dense(&b));
        let ba = matmul(&dense(&b), &dense(&a));
        prop_assert_eq!(a.commutes(&b).unwrap(), close(&ab, &ba));
    }

    #[test]
    fn multiplication_is_associative((a, b) in pair(8), c_seed in any::<u64>()) {
        let n = a.n();
        let c = PauliOperator::from_parts(
            BinaryVector::from_bits(n, c_seed & ((1 << n) - 1)),
            BinaryVector::from_bits(n, (c_seed >> 16) & ((1 << n) - 1)),
            (c_seed >> 40) as u8 & 3,
        ).unwrap();
        prop_assert_eq!((a * b) * c, a * (b * c));
    }

    #[test]
    fn text_round_trip(p in (1usize..10).prop_flat_map(pauli)) {
        let s = p.to_string();
        prop_assert_eq!(s.parse::<PauliOperator>().unwrap(), p);
        let json = serde_json::to_string(&p).unwrap();
        prop_assert_eq!(serde_json::from_str::<PauliOperator>(&json).unwrap(), p);
    }

    #[test]
    fn hermitian_squares_to_identity(p in (1usize..10).prop_flat_map(pauli)) {
        let sq = p * p;
        prop_assert!(sq.is_identity());
        prop_assert_eq!(sq.phase_exp() == 0, p.is_hermitian());
    }

    #[test]
    fn group_elements_are_signed_members(n in 3usize..=9, bits in any::<u64>()) {
        let g = StabilizerGroup::cycle(&CycleGraph::new(n).unwrap());
        let c = BinaryVector::from_bits(n, bits & ((1 << n) - 1));
        let e = g.element(&c);
        prop_assert_eq!(g.membership_with_sign(&e).unwrap(), Membership::Plus);
        prop_assert_eq!(g.membership_with_sign(&e.negated()).unwrap(), Membership::Minus);
        prop_assert_eq!(g.membership_with_sign(&e.with_phase((e.phase_exp() + 1) % 4)).unwrap(), Membership::NotMember);
        prop_assert_eq!(g.combination(&e).unwrap(), Some(c));
    }

    #[test]
    fn submeasurements_are_restrictions(n in 3usize..=9, bits in any::<u64>()) {
        let g = StabilizerGroup::cycle(&CycleGraph::new(n).unwrap());
        let x = BinaryVector::from_bits(n, bits & ((1 << n) - 1));
        let subs = g.stabilizer_submeasurements(&x).unwrap();
        prop_assert!(subs[0].0.is_identity());
        let full = PauliOperator::weyl(BinaryVector::ones(n), x).unwrap();
        for (p, s) in &subs {
            for j in 0..n {
                let f = p.factor(j);
                prop_assert!(f == Pauli::I || f == full.factor(j));
            }
            prop_assert_eq!(g.membership_with_sign(&p.with_sign(*s)).unwrap(), Membership::Plus);
        }
        // Exhaustive oracle: every restriction of E(1, x) that is a member.
        let members = BinaryVector::all(n)
            .filter(|q| g.membership_with_sign(&PauliOperator::weyl(*q, *q & x).unwrap()).unwrap() != Membership::NotMember)
            .count();
        prop_assert_eq!(members, subs.len());
    }
}

fn product_of_generators(g: &StabilizerGroup, x: &BinaryVector) -> PauliOperator {
    let mut acc = PauliOperator::identity(g.n());
    for j in x.ones_indices() {
        acc = acc.multiply(&g.generators()[j]).unwrap();
    }
    acc
}

#[test]
fn sign_formula_exhaustive_small_cycles() {
    for n in 3..=10 {
        let g = StabilizerGroup::cycle(&CycleGraph::new(n).unwrap());
        for x in BinaryVector::all(n) {
            let closed = cycle_stabilizer(n, &x).unwrap();
            assert_eq!(closed, product_of_generators(&g, &x), "n = {n}, x = {x}");
            assert_eq!(closed.sign() == Some(Sign::Minus), cubic_sign(&x));
        }
    }
}

#[test]
fn table_signs() {
    let x = |s: &str| s.parse::<BinaryVector>().unwrap();
    assert_eq!(cycle_stabilizer(6, &x("111100")).unwrap().to_string(), "+YXXYZZ");
    assert_eq!(cycle_stabilizer(6, &x("101110")).unwrap().to_string(), "-XIYXYI");
    assert_eq!(cycle_stabilizer(6, &x("001110")).unwrap().to_string(), "-IZYXYZ");
    assert_eq!(cycle_stabilizer(6, &x("111111")).unwrap().to_string(), "+XXXXXX");
}
