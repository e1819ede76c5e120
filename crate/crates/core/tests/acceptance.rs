//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use cluster_games::classical_bounds::*;
use cluster_games::games::*;
use cluster_games::graphsim::*;
use cluster_games::noise_fit::*;
use cluster_games::pauli_core::cycle_stabilizer;
use cluster_games::tomography::*;
use cluster_games::{BinaryVector, CycleGraph, PauliOperator, Rational, StabilizerGroup, StateVector64};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn r(a: i64, b: i64) -> Rational {
    Rational::new(a, b)
}

fn c6() -> (CycleGraph, StabilizerGroup) {
    let g = CycleGraph::new(6).unwrap();
    (g, StabilizerGroup::cycle(&g))
}

fn four_games() -> Vec<GameInstance> {
    vec![
        GameInstance::build(GameKind::Cbf, InputSetKind::Full, 6).unwrap(),
        GameInstance::build(GameKind::Cbf, InputSetKind::Mermin55, 6).unwrap(),
        GameInstance::build(GameKind::Ss, InputSetKind::Hlf8, 6).unwrap(),
        GameInstance::build(GameKind::Ss, InputSetKind::Hlf5, 6).unwrap(),
    ]
}

fn classical_bounds() -> Outcome {
    let start = Instant::now();
    let expected = [(r(23, 32), r(1, 1)), (r(37, 55), r(1, 1)), (r(7, 8), r(7, 8)), (r(4, 5), r(4, 5))];
    let mut found = Vec::new();
    for (game, (b0, b1)) in four_games().iter().zip(expected) {
        let d0 = depth0_bound(game).map_err(|e| e.to_string())?.beta;
        let d1 = depth1_bound(game).map_err(|e| e.to_string())?.beta;
        ensure!(d0 == b0 && d1 == b1, "{}: got ({d0}, {d1}), want ({b0}, {b1})", game.label());
        found.push(format!("({d0}, {d1})"));
    }
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(300), "took {t:?}");
    Ok(format!("{} in {:.1?}", found.join(" "), t))
}

fn obstruction() -> Outcome {
    for (n, d) in [(6, 1), (18, 3), (30, 5)] {
        let start = Instant::now();
        let res = parity_obstruction_check(n, d).map_err(|e| e.to_string())?;
        ensure!(matches!(res, ObstructionResult::Inconsistent { .. }), "(n, D) = ({n}, {d}) not inconsistent");
        let game = GameInstance::build(GameKind::Ss, InputSetKind::Hlfn5, n).unwrap();
        let strategy = ss_depth_plus_one_perfect_strategy(n, d).map_err(|e| e.to_string())?;
        let (beta, wins) = evaluate_strategy(&strategy, &game).map_err(|e| e.to_string())?;
        ensure!(beta == r(1, 1) && wins == 5, "depth {} strategy wins {wins}/5 at n = {n}", d + 1);
        let t = start.elapsed();
        ensure!(t < Duration::from_secs(1), "(n, D) = ({n}, {d}) took {t:?}");
    }
    Ok("inconsistent at (6,1) (18,3) (30,5); depth D+1 wins 5/5".into())
}

fn product_of_generators(g: &StabilizerGroup, x: &BinaryVector) -> PauliOperator {
    let mut acc = PauliOperator::identity(g.n());
    for j in x.ones_indices() {
        acc = acc.multiply(&g.generators()[j]).unwrap();
    }
    acc
}

fn sign_formula() -> Outcome {
    let mut checked = 0u64;
    for n in 3..=12 {
        let g = StabilizerGroup::cycle(&CycleGraph::new(n).unwrap());
        let xs: Vec<BinaryVector> = if n <= 10 {
            BinaryVector::all(n).collect()
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            (0..100_000).map(|_| BinaryVector::from_bits(n, rng.gen_range(0..1u64 << n))).collect()
        };
        for x in xs {
            let closed = cycle_stabilizer(n, &x).map_err(|e| e.to_string())?;
            ensure!(closed == product_of_generators(&g, &x), "n = {n}, x = {x}");
            checked += 1;
        }
    }
    Ok(format!("{checked} inputs"))
}

fn table_oracle() -> Outcome {
    let rows = reference_table();
    ensure!(rows.len() == 63, "{} rows", rows.len());
    let mut seen = std::collections::BTreeSet::new();
    for row in &rows {
        let s = cycle_stabilizer(6, &row.input).map_err(|e| e.to_string())?;
        ensure!(s == row.stabilizer, "{}: computed {s}, table {}", row.input, row.stabilizer);
        seen.insert(row.input);
    }
    ensure!(seen.len() == 63, "duplicate inputs");
    let x = |s: &str| s.parse::<BinaryVector>().unwrap();
    ensure!(cycle_stabilizer(6, &x("111100")).unwrap().to_string() == "+YXXYZZ", "111100");
    ensure!(cycle_stabilizer(6, &x("101110")).unwrap().to_string() == "-XIYXYI", "101110");
    Ok("63/63 strings and signs".into())
}

fn perfect_strategies() -> Outcome {
    let rng = TrajectoryRng::new(2024);
    let mut rounds = 0;
    for game in four_games() {
        let out = play_quantum(&game, &NoiseParams::none(), 1000, &rng, 0).map_err(|e| e.to_string())?;
        let losses = out.records.iter().filter(|r| !r.won).count();
        ensure!(losses == 0, "{}: {losses} losses", game.label());
        rounds += out.records.len();
    }
    Ok(format!("0 losses in {rounds} rounds"))
}

fn distribution_law() -> Outcome {
    let game = GameInstance::build(GameKind::Ss, InputSetKind::Hlf8, 6).unwrap();
    let shots = 100_000;
    let out = play_quantum(&game, &NoiseParams::none(), shots, &TrajectoryRng::new(6), 0).map_err(|e| e.to_string())?;
    let mut worst = 1.0f64;
    for (i, x) in game.inputs().iter().enumerate() {
        let win: Vec<BinaryVector> = BinaryVector::all(6).filter(|y| game.wins_at(i, y)).collect();
        let mut counts = vec![0u64; 64];
        for rec in out.records.iter().filter(|rec| rec.x == *x) {
            counts[rec.y.bits() as usize] += 1;
        }
        for y in BinaryVector::all(6) {
            let c = counts[y.bits() as usize];
            ensure!(win.contains(&y) || c == 0, "x = {x}: {c} outcomes {y} outside Win(x)");
        }
        let e = shots as f64 / win.len() as f64;
        let chi2: f64 = win.iter().map(|y| (counts[y.bits() as usize] as f64 - e).powi(2) / e).sum();
        let p = if win.len() > 1 { 1.0 - ChiSquared::new((win.len() - 1) as f64).unwrap().cdf(chi2) } else { 1.0 };
        ensure!(p > 1e-3, "x = {x}: chi2 = {chi2:.1} over {} cells, p = {p:.2e}", win.len());
        worst = worst.min(p);
    }
    Ok(format!("supported on Win(x), min chi2 p = {worst:.3}"))
}

fn bell_equality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let games = four_games();
    for k in 0..10_000 {
        let game = &games[k % games.len()];
        let answers: Vec<BinaryVector> =
            game.inputs().iter().map(|_| BinaryVector::from_bits(6, rng.gen_range(0..64))).collect();
        let bell = bell_success_probability_with_inputs::<Rational, _>(game, |x, p| {
            let i = game.inputs().iter().position(|v| v == x)?;
            Some(if p.support().dot(&answers[i]) { r(-1, 1) } else { r(1, 1) })
        })
        .map_err(|e| e.to_string())?;
        let wins = game.inputs().iter().zip(&answers).filter(|(x, y)| game.referee(x, y).unwrap()).count();
        ensure!(bell == r(wins as i64, game.inputs().len() as i64), "{}: strategy {k}", game.label());
    }
    let op = bell_operator::<Rational>(&games[2]);
    let p = |s: &str| s.parse::<PauliOperator>().unwrap();
    ensure!(op.constant() == r(12, 32), "constant {}", op.constant());
    ensure!(op.coefficient(&p("IXIXIX")) == r(12, 32), "IXIXIX {}", op.coefficient(&p("IXIXIX")));
    for q in ["XIXIXI", "XXXXXX"] {
        ensure!(op.coefficient(&p(q)) == r(1, 32), "{q}: {}", op.coefficient(&p(q)));
    }
    for q in ["XIYXYI", "XXYIYX", "YIXIYX", "YXXXYI", "YXYIXI", "YIYXXX"] {
        ensure!(op.coefficient(&p(q)) == r(-1, 32), "{q}: {}", op.coefficient(&p(q)));
    }
    ensure!(op.terms.len() == 10, "{} terms", op.terms.len());
    Ok("10^4 strategies exact; HLF8 coefficients 12/32, 1/32 and six -1/32 terms".into())
}

fn noise_analytics() -> Outcome {
    let noise = NoiseParams { p2d: 0.035, ..NoiseParams::none() };
    let (mean, se) = rxx_parity_population(&noise, 1_000_000, &TrajectoryRng::new(8), 0).map_err(|e| e.to_string())?;
    let expect = 8.0 * 0.035 / 15.0;
    ensure!((mean - expect).abs() <= 3.0 * se, "A = {mean:.5} +- {se:.5}, want {expect:.5}");
    let exact = r(35, 1000) + r(4, 5) * r(35, 1000);
    ensure!(exact == r(63, 1000), "{exact}");
    let f = NoiseParams::fitted();
    ensure!((f.two_qubit_infidelity() - 0.063).abs() < 1e-12, "{}", f.two_qubit_infidelity());
    Ok(format!("A = {mean:.5} +- {se:.5} (8 p2d/15 = {expect:.5}); infidelity {exact}"))
}

fn tomography_pipeline() -> Outcome {
    let start = Instant::now();
    let (_, group) = c6();
    let plan = greedy_clique_cover(&nontrivial_stabilizers(&group)).map_err(|e| e.to_string())?;
    let noise = NoiseParams::fitted();
    let report = simulate_report(&plan, &noise, 5000, &TrajectoryRng::new(9), 0).map_err(|e| e.to_string())?;
    let f = fidelity_and_witness(&report, &group).map_err(|e| e.to_string())?;
    ensure!((0.60..=0.73).contains(&f.fidelity), "F = {:.4}", f.fidelity);
    ensure!(f.witness < 0.0, "W = {:.4}", f.witness);
    let cbf = GameInstance::build(GameKind::Cbf, InputSetKind::Full, 6).unwrap();
    let q = quantum_success(&cbf, &noise, 5000, &TrajectoryRng::new(9), 1).map_err(|e| e.to_string())?;
    let predicted = (f.fidelity + 1.0) / 2.0;
    let sigma = q.stderr.hypot(f.stderr / 2.0);
    ensure!(
        (q.p_hat - predicted).abs() <= 3.0 * sigma,
        "Pr = {:.4}, (F+1)/2 = {predicted:.4}, sigma {sigma:.4}",
        q.p_hat
    );
    let t = start.elapsed();
    ensure!(t < Duration::from_secs(1800), "took {t:?}");
    Ok(format!(
        "F = {}, W = {:.4}, Pr_CBF = {:.4} vs (F+1)/2 = {predicted:.4}",
        format_with_uncertainty(f.fidelity, f.stderr, 4),
        f.witness,
        q.p_hat
    ))
}

fn fit_self_consistency() -> Outcome {
    let (_, group) = c6();
    let plan = greedy_clique_cover(&nontrivial_stabilizers(&group)).map_err(|e| e.to_string())?;
    let truth = (0.012, 0.035, 0.035);
    let reference = simulate_report(
        &plan,
        &NoiseParams::with_rates(truth.0, truth.1, truth.2),
        100_000,
        &TrajectoryRng::new(5),
        1000,
    )
    .map_err(|e| e.to_string())?;
    let p1d = vec![0.004, 0.008, 0.012, 0.016, 0.020];
    let p2 = vec![0.025, 0.030, 0.035, 0.040, 0.045];
    let grid = FitGrid::new(p1d.clone(), p2.clone(), p2, 10_000, 7);
    let fit = grid_fit(&reference, &grid).map_err(|e| e.to_string())?;
    let b = fit.best_fit;
    let close = |got: f64, want: f64, step: f64| (got - want).abs() <= step + 1e-12;
    ensure!(
        close(b.p1d, truth.0, 0.004) && close(b.p2xx, truth.1, 0.005) && close(b.p2d, truth.2, 0.005),
        "recovered ({}, {}, {})",
        b.p1d,
        b.p2xx,
        b.p2d
    );
    let no_xx = FitGrid::new(p1d, vec![0.0], (0..8).map(|i| 0.045 + 0.005 * i as f64).collect(), 10_000, 7);
    let fit0 = grid_fit(&reference, &no_xx).map_err(|e| e.to_string())?;
    ensure!(fit0.best_fit.delta_s > b.delta_s, "p2XX = 0 gives dS = {:.4} <= {:.4}", fit0.best_fit.delta_s, b.delta_s);
    Ok(format!(
        "recovered ({:.3}, {:.3}, {:.3}) dS = {:.4}; p2XX = 0 dS = {:.4}",
        b.p1d, b.p2xx, b.p2d, b.delta_s, fit0.best_fit.delta_s
    ))
}

fn estimator_statistics() -> Outcome {
    let (g, group) = c6();
    let plan = greedy_clique_cover(&nontrivial_stabilizers(&group)).map_err(|e| e.to_string())?;
    let prep = preparation_circuit(&g, PrepForm::Rxx).unwrap();
    let noise = NoiseParams::fitted();
    let reps = 1000;
    let mut fs = Vec::with_capacity(reps);
    let mut analytic = 0.0;
    for k in 0..reps {
        let data = simulate_dataset(&plan, &prep, &noise, 200, &TrajectoryRng::new(11), k as u64, None)
            .map_err(|e| e.to_string())?;
        let rep = estimate_expectations::<f64>(&plan, &data).map_err(|e| e.to_string())?;
        let f = fidelity_and_witness(&rep, &group).map_err(|e| e.to_string())?;
        fs.push(f.fidelity);
        analytic += f.stderr;
    }
    analytic /= reps as f64;
    let mean = fs.iter().sum::<f64>() / reps as f64;
    let spread = (fs.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
    let rel = (analytic - spread).abs() / spread;
    ensure!(rel < 0.15, "analytic {analytic:.5} vs empirical {spread:.5}");

    // Readout round trip against the exact distribution of a depolarized cluster state.
    let lambda = 0.25;
    let state: StateVector64 = cluster_state(&g, PrepForm::Cz).unwrap();
    let confusion = ConfusionModel::from_flip_rates(&[(0.02, 0.03); 6]).map_err(|e| e.to_string())?;
    let mut data = ShotDataset::empty(&plan);
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (l, c) in plan.cliques.iter().enumerate() {
        let clean: Vec<f64> = state
            .rotated(&c.basis)
            .unwrap()
            .probabilities()
            .iter()
            .map(|p| (1.0 - lambda) * p + lambda / 64.0)
            .collect();
        let w = WeightedIndex::new(confusion.apply_to_distribution(&clean)).unwrap();
        for _ in 0..100_000 {
            data.cliques[l].record(BinaryVector::from_bits(6, w.sample(&mut rng) as u64));
        }
    }
    let fixed = spam_correct::<f64>(&plan, &data, &confusion).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for e in &fixed.estimates {
        let z = (e.mean - (1.0 - lambda)).abs() / e.stderr;
        ensure!(z <= 3.0, "{}: {:.4} +- {:.4}", e.stabilizer, e.mean, e.stderr);
        worst = worst.max(z);
    }
    Ok(format!("stderr {analytic:.5} vs spread {spread:.5} ({:.1}%); SPAM max |z| = {worst:.2}", 100.0 * rel))
}

fn sampling_budget_check() -> Outcome {
    let m = sampling_budget(0.1, 0.05).map_err(|e| e.to_string())?;
    ensure!(m == 3506, "budget {m}");
    let (g, group) = c6();
    let prep = preparation_circuit(&g, PrepForm::Rxx).unwrap();
    let rng = TrajectoryRng::new(13);
    let mut good = 0;
    for k in 0..200 {
        let (f, _) =
            randomized_fidelity(&group, &prep, &NoiseParams::none(), m as usize, &rng, k).map_err(|e| e.to_string())?;
        if (f - 1.0).abs() <= 0.1 {
            good += 1;
        }
    }
    ensure!(good >= 190, "{good}/200 within epsilon");
    Ok(format!("budget 3506; {good}/200 within epsilon"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("classical bounds", classical_bounds),
        ("parity obstruction", obstruction),
        ("stabilizer sign formula", sign_formula),
        ("stabilizer table", table_oracle),
        ("perfect quantum strategies", perfect_strategies),
        ("outcome distribution law", distribution_law),
        ("bell operator equality", bell_equality),
        ("noise analytics", noise_analytics),
        ("tomography pipeline", tomography_pipeline),
        ("fit self-consistency", fit_self_consistency),
        ("estimator statistics", estimator_statistics),
        ("sampling budget", sampling_budget_check),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or(e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        let t = start.elapsed();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{t:.1?}]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {why} [{t:.1?}]", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
