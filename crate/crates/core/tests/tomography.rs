use rand::distributions::{Distribution, WeightedIndex};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use cluster_games::graphsim::{cluster_state, preparation_circuit, NoiseParams, PrepForm, TrajectoryRng};
use cluster_games::tomography::*;
use cluster_games::{BinaryVector, CycleGraph, PauliOperator, StabilizerGroup, StateVector64};

fn c6() -> (CycleGraph, StabilizerGroup) {
    let g = CycleGraph::new(6).unwrap();
    (g, StabilizerGroup::cycle(&g))
}

fn greedy_plan(group: &StabilizerGroup) -> MeasurementPlan {
    greedy_clique_cover(&nontrivial_stabilizers(group)).unwrap()
}

/// Exact readout distribution of every setting for `(1 - lambda) |C6><C6| + lambda I/64`.
fn mixture_distributions(plan: &MeasurementPlan, lambda: f64) -> Vec<Vec<f64>> {
    let (g, _) = c6();
    let state: StateVector64 = cluster_state(&g, PrepForm::Cz).unwrap();
    plan.cliques
        .iter()
        .map(|c| {
            let p = state.rotated(&c.basis).unwrap().probabilities();
            p.iter().map(|v| (1.0 - lambda) * v + lambda / p.len() as f64).collect()
        })
        .collect()
}

fn sample(plan: &MeasurementPlan, dists: &[Vec<f64>], shots: usize, rng: &mut ChaCha8Rng) -> ShotDataset {
    let mut data = ShotDataset::empty(plan);
    for (l, d) in dists.iter().enumerate() {
        let w = WeightedIndex::new(d).unwrap();
        for _ in 0..shots {
            data.cliques[l].record(BinaryVector::from_bits(plan.n, w.sample(rng) as u64));
        }
    }
    data
}

#[test]
fn noiseless_plan_reproduces_plus_one() {
    let (g, group) = c6();
    let plan = greedy_plan(&group);
    let prep = preparation_circuit(&g, PrepForm::Rxx).unwrap();
    let data = simulate_dataset(&plan, &prep, &NoiseParams::none(), 200, &TrajectoryRng::new(1), 0, None).unwrap();
    let rep = estimate_expectations::<f64>(&plan, &data).unwrap();
    assert_eq!(rep.estimates.len(), 63);
    for e in &rep.estimates {
        assert_eq!(e.mean, 1.0, "{}", e.stabilizer);
        assert_eq!(e.stderr, 0.0);
    }
    let f = fidelity_and_witness(&rep, &group).unwrap();
    assert_eq!(f.fidelity, 1.0);
    assert_eq!(f.witness, -0.5);
    assert!(f.entangled);
}

#[test]
fn negative_member_flips_the_parity_mean() {
    let plus = MeasurementPlan::from_groups(vec![vec!["+ZZ".parse().unwrap()]]).unwrap();
    let minus = MeasurementPlan::from_groups(vec![vec!["-ZZ".parse().unwrap()]]).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    // P(even parity) = 0.7
    let d = vec![vec![0.35, 0.15, 0.15, 0.35]];
    let mut a = sample(&plus, &d, 2000, &mut rng);
    let ra = estimate_expectations::<f64>(&plus, &a).unwrap();
    a.plan_hash = minus.hash();
    let rb = estimate_expectations::<f64>(&minus, &a).unwrap();
    assert_eq!(ra.estimates[0].mean, -rb.estimates[0].mean);
}

#[test]
fn dataset_must_match_plan() {
    let (_, group) = c6();
    let plan = greedy_plan(&group);
    let mut data = ShotDataset::empty(&plan);
    assert!(matches!(estimate_expectations::<f64>(&plan, &data), Err(TomographyError::NoShots(0))));
    data.plan_hash = "other".into();
    assert!(matches!(estimate_expectations::<f64>(&plan, &data), Err(TomographyError::PlanMismatch(_))));
}

#[test]
fn table_grouping_is_a_valid_plan() {
    let rows = reference_table();
    assert_eq!(rows.len(), 63);
    let plan = plan_from_table(&rows).unwrap();
    assert_eq!(plan.len(), 37);
    assert_eq!(plan.cliques[0].basis_string(), "ZZXZZX");
    let mut buf = Vec::new();
    write_table_csv(&rows, &mut buf).unwrap();
    assert_eq!(read_table_csv(buf.as_slice()).unwrap(), rows);
}

#[test]
fn covariance_block_structure() {
    let (_, group) = c6();
    let plan = greedy_plan(&group);
    let dists = mixture_distributions(&plan, 0.3);
    let data = sample(&plan, &dists, 4000, &mut ChaCha8Rng::seed_from_u64(4));
    let rep = estimate_expectations::<f64>(&plan, &data).unwrap();
    for b in &rep.blocks {
        for (a, &i) in b.members.iter().enumerate() {
            let e = &rep.estimates[i];
            assert!((b.sigma[a][a] - (1.0 - e.mean * e.mean)).abs() < 1e-12);
            for c in 0..b.members.len() {
                assert_eq!(b.sigma[a][c], b.sigma[c][a]);
            }
        }
    }
    let cross = rep.estimates.iter().position(|e| e.clique != rep.estimates[0].clique).unwrap();
    assert!(matches!(rep.covariance(0, cross), Err(TomographyError::CrossClique(..))));
    assert!(rep.covariance(0, 0).unwrap() >= 0.0);
}

#[test]
fn independent_bits_have_vanishing_covariance() {
    let plan = MeasurementPlan::from_groups(vec![vec!["+ZI".parse().unwrap(), "+IZ".parse().unwrap()]]).unwrap();
    let n = 20_000;
    let data = sample(&plan, &[vec![0.25; 4]], n, &mut ChaCha8Rng::seed_from_u64(5));
    let rep = estimate_expectations::<f64>(&plan, &data).unwrap();
    assert!(rep.covariance(0, 1).unwrap().abs() < 3.0 / (n as f64).sqrt());
}

#[test]
fn covariance_matches_bootstrap() {
    // GHZ-like: outcomes 000 and 111 dominate.
    let s = ["+ZZI", "+IZZ", "+ZIZ"].map(|p| p.parse::<PauliOperator>().unwrap());
    let plan = MeasurementPlan::from_groups(vec![s.to_vec()]).unwrap();
    let mut d = vec![0.02; 8];
    d[0] = 0.45;
    d[7] = 0.43;
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let data = sample(&plan, &[d], n, &mut rng);
    let rep = estimate_expectations::<f64>(&plan, &data).unwrap();
    let outcomes: Vec<(BinaryVector, u64)> = data.cliques[0].tallies.iter().map(|(k, v)| (*k, *v)).collect();
    let w = WeightedIndex::new(outcomes.iter().map(|o| o.1)).unwrap();
    let reps = 1000;
    let mut means = vec![[0.0f64; 2]; reps];
    for m in means.iter_mut() {
        let mut acc = [0i64; 2];
        for _ in 0..n {
            let b = outcomes[w.sample(&mut rng)].0;
            for (k, st) in [&s[0], &s[1]].iter().enumerate() {
                acc[k] += if st.support().dot(&b) { -1 } else { 1 };
            }
        }
        *m = [acc[0] as f64 / n as f64, acc[1] as f64 / n as f64];
    }
    let avg = |k: usize| means.iter().map(|m| m[k]).sum::<f64>() / reps as f64;
    let (a0, a1) = (avg(0), avg(1));
    let boot = means.iter().map(|m| (m[0] - a0) * (m[1] - a1)).sum::<f64>() / (reps - 1) as f64;
    let analytic = rep.covariance(0, 1).unwrap() / n as f64;
    assert!(((analytic - boot) / analytic).abs() < 0.10, "analytic {analytic} bootstrap {boot}");
}

#[test]
fn estimator_is_unbiased() {
    let plan = MeasurementPlan::from_groups(vec![vec!["+ZZ".parse().unwrap()]]).unwrap();
    let mu: f64 = 0.6;
    let d = vec![vec![(1.0 + mu) / 4.0, (1.0 - mu) / 4.0, (1.0 - mu) / 4.0, (1.0 + mu) / 4.0]];
    let (reps, n) = (1000, 500);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mean = (0..reps)
        .map(|_| estimate_expectations::<f64>(&plan, &sample(&plan, &d, n, &mut rng)).unwrap().estimates[0].mean)
        .sum::<f64>()
        / reps as f64;
    let stderr = ((1.0 - mu * mu) / n as f64).sqrt();
    assert!((mean - mu).abs() < 4.0 * stderr / (reps as f64).sqrt());
}

#[test]
fn readout_flips_are_corrected() {
    let (_, group) = c6();
    let plan = greedy_plan(&group);
    let lambda = 0.25;
    let confusion = ConfusionModel::from_flip_rates(&[(0.02, 0.02); 6]).unwrap();
    assert!(confusion.inverse_residual() < 1e-9);
    let observed: Vec<Vec<f64>> =
        mixture_distributions(&plan, lambda).iter().map(|q| confusion.apply_to_distribution(q)).collect();
    let data = sample(&plan, &observed, 100_000, &mut ChaCha8Rng::seed_from_u64(9));
    let raw = estimate_expectations::<f64>(&plan, &data).unwrap();
    let fixed = spam_correct::<f64>(&plan, &data, &confusion).unwrap();
    for (r, c) in raw.estimates.iter().zip(&fixed.estimates) {
        assert!((c.mean - (1.0 - lambda)).abs() <= 3.0 * c.stderr, "{} {} +- {}", c.stabilizer, c.mean, c.stderr);
        assert!(r.mean < c.mean);
    }
    let identity = spam_correct::<f64>(&plan, &data, &ConfusionModel::identity(6)).unwrap();
    for (r, c) in raw.estimates.iter().zip(&identity.estimates) {
        assert!((r.mean - c.mean).abs() < 1e-12);
    }
}

#[test]
fn over_unity_values_are_flagged_not_clamped() {
    let plan = MeasurementPlan::from_groups(vec![vec!["+Z".parse().unwrap()]]).unwrap();
    let confusion = ConfusionModel::from_flip_rates(&[(0.1, 0.1)]).unwrap();
    let mut data = ShotDataset::empty(&plan);
    for _ in 0..5 {
        data.cliques[0].record(BinaryVector::zeros(1));
    }
    let rep = spam_correct::<f64>(&plan, &data, &confusion).unwrap();
    assert!(rep.estimates[0].mean > 1.0);
    assert!(rep.estimates[0].out_of_range);
}

#[test]
fn incomplete_coverage_is_reported() {
    let (_, group) = c6();
    let some: Vec<PauliOperator> = nontrivial_stabilizers(&group).into_iter().take(10).collect();
    let plan = greedy_clique_cover(&some).unwrap();
    let mut data = ShotDataset::empty(&plan);
    for c in data.cliques.iter_mut() {
        c.record(BinaryVector::zeros(6));
    }
    let rep = estimate_expectations::<f64>(&plan, &data).unwrap();
    match fidelity_and_witness(&rep, &group) {
        Err(TomographyError::IncompleteCoverage(m)) => assert_eq!(m.len(), 53),
        other => panic!("{other:?}"),
    }
}

#[test]
fn bar_chart_csv_shapes() {
    let rep = report_from_table(&reference_table(), false).unwrap();
    let mut buf = Vec::new();
    write_bar_chart_csv(&rep, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 64);
    assert!(text.starts_with("input,stabilizer,value,stderr"));
    let empty = EstimationReport::<f64> { n: 6, spam_corrected: false, estimates: vec![], blocks: vec![] };
    let mut buf = Vec::new();
    write_bar_chart_csv(&empty, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().trim(), "input,stabilizer,value,stderr");
}
