use dsl_core::born::*;
use dsl_core::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn born_rule_never_signals() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut worst: f64 = 0.0;
    for s in 0..200 {
        let d = 2 + s % 3;
        let state = BipartiteState::random(d, d, &mut rng).unwrap();
        let us: Vec<CMatrix> = (0..20).map(|_| random_unitary(d, &mut rng)).collect();
        worst = worst.max(signaling_gap(&state, &us, CollapseRule::born()).unwrap());
    }
    assert!(worst < 1e-10, "worst gap {worst:e}");
}

#[test]
fn gap_closes_continuously_at_born_exponent() {
    let state = BipartiteState::schmidt_example();
    let us = [CMatrix::identity(2, 2), hadamard()];
    let scan = gap_scan(&state, &us, &[1.9, 1.99, 2.0, 2.01, 2.1]).unwrap();
    let g: Vec<f64> = scan.iter().map(|s| s.1).collect();
    assert!(g[0] > g[1] && g[1] > g[2]);
    assert!(g[4] > g[3] && g[3] > g[2]);
    assert!(g[2] < 1e-15);
    // first order in p - 2
    let ratio = g[1] / g[0];
    assert!(ratio > 0.08 && ratio < 0.12, "ratio {ratio}");
}

#[test]
fn gap_grows_away_from_born() {
    let state = BipartiteState::schmidt_example();
    let us = [CMatrix::identity(2, 2), hadamard()];
    let scan = gap_scan(&state, &us, &[0.5, 1.0, 1.5]).unwrap();
    assert!(scan[0].1 > scan[1].1 && scan[1].1 > scan[2].1);
    assert!((scan[1].1 - 8.09e-2).abs() < 1e-4);
}

#[test]
fn rotations_preserve_reduced_state() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for d in 2..=4 {
        let state = BipartiteState::random(d, 3, &mut rng).unwrap();
        let u = random_unitary(d, &mut rng);
        let rotated = rotate_alice(&state, &u).unwrap();
        let diff = partial_trace_a(&rotated).frobenius_distance(&partial_trace_a(&state)).unwrap();
        assert!(diff < 1e-12);
    }
}

fn complex_vec(len: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), len)
        .prop_filter("non-zero", |v| v.iter().any(|(a, b)| a.abs() + b.abs() > 1e-3))
        .prop_map(|v| v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn product_states_are_immune(a in complex_vec(3), b in complex_vec(2), p in 0.2f64..5.0, seed in any::<u64>()) {
        let state = BipartiteState::product(&a, &b).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let us: Vec<CMatrix> = (0..4).map(|_| random_unitary(3, &mut rng)).collect();
        let gap = signaling_gap(&state, &us, CollapseRule::new(p).unwrap()).unwrap();
        prop_assert!(gap < 1e-12);
    }

    #[test]
    fn averages_satisfy_density_invariants(p in 0.2f64..5.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let state = BipartiteState::random(3, 4, &mut rng).unwrap();
        let avg = measure_average(&state, &random_unitary(3, &mut rng), CollapseRule::new(p).unwrap()).unwrap();
        prop_assert!(DensityMatrix::new(avg.entries().clone()).is_ok());
    }
}
