use cluster_games::classical_bounds::{
    bound, depth0_bound, depth1_bound, evaluate_strategy, parity_obstruction_check, ss_depth_plus_one_perfect_strategy,
    BoundMethod, GeometricCircuitStrategy, ObstructionResult, OutputFunction,
};
use cluster_games::games::{GameInstance, GameKind, InputSetKind};
use cluster_games::Rational;

fn game(k: GameKind, s: InputSetKind) -> GameInstance {
    GameInstance::build(k, s, 6).unwrap()
}

#[test]
fn depth0_values() {
    let cases = [
        (GameKind::Cbf, InputSetKind::Full, (23, 32)),
        (GameKind::Cbf, InputSetKind::Mermin55, (37, 55)),
        (GameKind::Ss, InputSetKind::Hlf8, (7, 8)),
        (GameKind::Ss, InputSetKind::Hlf5, (4, 5)),
    ];
    for (k, s, (a, b)) in cases {
        let r = depth0_bound(&game(k, s)).unwrap();
        assert_eq!(r.beta, Rational::new(a, b), "{}", r.game);
        assert_eq!(r.method, BoundMethod::Exhaustive);
    }
}

#[test]
fn depth1_values() {
    let cases = [
        (GameKind::Cbf, InputSetKind::Full, (1, 1)),
        (GameKind::Cbf, InputSetKind::Mermin55, (1, 1)),
        (GameKind::Ss, InputSetKind::Hlf8, (7, 8)),
        (GameKind::Ss, InputSetKind::Hlf5, (4, 5)),
    ];
    for (k, s, (a, b)) in cases {
        let g = game(k, s);
        let r = depth1_bound(&g).unwrap();
        assert_eq!(r.beta, Rational::new(a, b), "{}", r.game);
        assert_eq!(evaluate_strategy(&r.witness, &g).unwrap().0, r.beta);
        assert!(depth0_bound(&g).unwrap().beta <= r.beta);
    }
}

#[test]
fn hierarchy_endpoints_for_hlf5() {
    let g = game(GameKind::Ss, InputSetKind::Hlf5);
    assert_eq!(bound(&g, 2).unwrap().beta, Rational::from_integer(1));
    let s = ss_depth_plus_one_perfect_strategy(6, 1).unwrap();
    assert_eq!(evaluate_strategy(&s, &g).unwrap().0, Rational::from_integer(1));
}

#[test]
fn obstruction_for_odd_depths() {
    for d in [1, 3, 5] {
        let r = parity_obstruction_check(6 * d, d).unwrap();
        assert!(matches!(r, ObstructionResult::Inconsistent { .. }), "D = {d}: {r:?}");
    }
}

#[test]
fn obstruction_agrees_with_search() {
    let r = depth1_bound(&game(GameKind::Ss, InputSetKind::Hlf5)).unwrap();
    assert!(r.beta < Rational::from_integer(1));
    assert!(matches!(parity_obstruction_check(6, 1).unwrap(), ObstructionResult::Inconsistent { .. }));
}

/// Replacing one output of the optimum by every function of its full light cone
/// (constant positions included) never beats the reduced search.
#[test]
fn reduction_is_sound_for_one_output() {
    for s in [InputSetKind::Hlf8, InputSetKind::Hlf5] {
        let g = game(GameKind::Ss, s);
        let r = depth1_bound(&g).unwrap();
        for j in 0..6 {
            let cone = vec![(j + 5) % 6, j, (j + 1) % 6];
            for t in 0u32..256 {
                let mut w: GeometricCircuitStrategy = r.witness.clone();
                w.outputs[j] =
                    OutputFunction { inputs: cone.clone(), table: (0..8).map(|v| (t >> v) & 1 == 1).collect() };
                assert!(evaluate_strategy(&w, &g).unwrap().0 <= r.beta);
            }
        }
    }
}
