use proptest::prelude::*;

use super::*;

fn sim(q: f64, z: u64, trials: u64, seed: u64) -> SimResult {
    simulate_attack(&AttackParams::new(q, z, trials, seed)).unwrap()
}

#[test]
fn catch_up_edges() {
    for z in 1..20 {
        assert_eq!(catch_up_probability(0.0, z), 0.0);
    }
    for q in [0.0, 0.1, 0.49, 0.5, 0.9] {
        assert_eq!(catch_up_probability(q, 0), 1.0);
    }
    assert_eq!(catch_up_probability(0.5, 10), 1.0);
    assert_eq!(catch_up_probability(0.7, 3), 1.0);
    // (0.25/0.75)^2
    assert!((catch_up_probability(0.25, 2) - 1.0 / 9.0).abs() < 1e-15);
}

#[test]
fn simulate_q_zero_is_exactly_zero() {
    let r = sim(0.0, 3, 10_000, 1);
    assert_eq!(r.estimate, 0.0);
    assert_eq!(r.successes, 0);
    assert_eq!(r.truncation_bound, 0.0);
}

#[test]
fn simulate_z_zero_is_one() {
    let r = sim(0.2, 0, 1000, 1);
    assert_eq!(r.estimate, 1.0);
    assert_eq!(r.stderr, 0.0);
}

#[test]
fn simulate_matches_closed_form_q03_z6() {
    let r = sim(0.3, 6, 1_000_000, 42);
    let exact = catch_up_probability(0.3, 6);
    assert!(
        (r.estimate - exact).abs() <= 3.0 * r.stderr,
        "{} vs {exact} (stderr {})",
        r.estimate,
        r.stderr
    );
    assert!(r.truncation_bound < 1e-6);
}

#[test]
fn symmetric_walk_recurs_within_truncation() {
    let r = sim(0.5, 1, 20_000, 7);
    assert!(r.horizon_hits > 0);
    assert_eq!(r.abandoned, 0);
    assert!(r.estimate < 1.0);
    assert!(r.estimate + r.truncation_bound >= 1.0 - 1e-12);
    // Undecided mass after 10^4 steps is about sqrt(2 / (pi * 10^4)) = 0.008.
    assert!(r.truncation_bound < 0.02, "{}", r.truncation_bound);
}

#[test]
fn simulation_is_seed_deterministic() {
    let a = sim(0.35, 4, 200_000, 99);
    let b = sim(0.35, 4, 200_000, 99);
    assert_eq!(a, b);
    let c = sim(0.35, 4, 200_000, 100);
    assert_ne!(a.successes, c.successes);
}

#[test]
fn chunking_does_not_depend_on_thread_count() {
    let params = AttackParams::new(0.3, 3, 300_000, 5);
    let parallel = simulate_attack(&params).unwrap();
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(|| simulate_attack(&params).unwrap());
    let many = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(|| simulate_attack(&params).unwrap());
    assert_eq!(parallel, single);
    assert_eq!(parallel, many);
}

#[test]
fn stderr_formula() {
    let r = sim(0.4, 2, 50_000, 3);
    let expect = (r.estimate * (1.0 - r.estimate) / 50_000.0).sqrt();
    assert_eq!(r.stderr, expect);
    assert_eq!(r.estimate, r.successes as f64 / 50_000.0);
}

#[test]
fn invalid_params_are_refused() {
    for p in [
        AttackParams::new(1.0, 1, 1, 0),
        AttackParams::new(-0.1, 1, 1, 0),
        AttackParams::new(f64::NAN, 1, 1, 0),
        AttackParams::new(0.1, 1, 0, 0),
        AttackParams {
            n: 0,
            ..AttackParams::new(0.1, 1, 1, 0)
        },
        AttackParams {
            horizon: 0,
            ..AttackParams::new(0.1, 1, 1, 0)
        },
        AttackParams {
            lambda: 0.0,
            ..AttackParams::new(0.1, 1, 1, 0)
        },
    ] {
        assert!(simulate_attack(&p).is_err(), "{p:?}");
    }
    assert!(AttackParams::new(0.4, 1, 1, 0).closed_form_valid());
    assert!(!AttackParams::new(0.5, 1, 1, 0).closed_form_valid());
    assert!((AttackParams::new(0.1, 6, 1, 0).confirmation_seconds() - 3600.0).abs() < 1e-9);
}

#[test]
fn acceptance_is_complement_of_attack() {
    let acc = acceptance_probability_estimate(0.25, 6, 1_000_000, 11).unwrap();
    let atk = sim(0.25, 6, 1_000_000, 12);
    let sigma = (acc.stderr.powi(2) + atk.stderr.powi(2)).sqrt();
    assert!(
        (acc.estimate - (1.0 - atk.estimate)).abs() <= 3.0 * sigma,
        "{} vs 1 - {}",
        acc.estimate,
        atk.estimate
    );
    let same_seed = sim(0.25, 6, 1_000_000, 11);
    assert_eq!(acc.estimate, 1.0 - same_seed.estimate);
}

#[test]
fn acceptance_edges() {
    for i in 0..10 {
        let r = acceptance_probability_estimate(0.0, i, 100, 0).unwrap();
        assert_eq!(r.estimate, 1.0);
    }
    // Already level: the attacker's chain is accepted outright.
    assert_eq!(
        acceptance_probability_estimate(0.3, 0, 100, 0)
            .unwrap()
            .estimate,
        0.0
    );
}

#[test]
fn cascade_examples() {
    let exact = cascade_breach_exact(&"0.1".parse().unwrap(), 5).unwrap();
    assert_eq!(exact.to_string(), "1e-5");
    assert!((cascade_breach_probability(0.1, 5).unwrap() - 1e-5).abs() < 1e-20);
    // Brute-force product.
    let brute: f64 = [0.3f64; 3].iter().product();
    assert!((cascade_breach_probability(0.3, 3).unwrap() - brute).abs() < 1e-15);
    assert_eq!(
        cascade_breach_exact(&"0.3".parse().unwrap(), 3)
            .unwrap()
            .to_string(),
        "0.027"
    );
    for p in [0.0, 0.3, 0.77, 1.0] {
        assert_eq!(cascade_breach_probability(p, 1).unwrap(), p);
    }
    assert!(cascade_breach_probability(0.2, 0).is_err());
    assert!(cascade_breach_probability(1.5, 2).is_err());
    assert!(cascade_breach_exact(&"1.01".parse().unwrap(), 2).is_err());
    assert!(cascade_breach_exact(&"0.5".parse().unwrap(), 0).is_err());
}

#[test]
fn robustness_ratio_examples() {
    let r = epsilon_robustness_ratio(0.001, 0.9).unwrap();
    assert!((r - 0.001 / 0.9).abs() < 1e-18);
    assert!((r - 0.001_111_111_111).abs() < 1e-12);
    assert!(is_epsilon_robust(0.001, 0.9, 0.01).unwrap());
    assert_eq!(epsilon_robustness_ratio(0.0, 0.4).unwrap(), 0.0);
    assert_eq!(epsilon_robustness_ratio(0.5, 0.5).unwrap(), 1.0);
    assert!(!is_epsilon_robust(0.5, 0.5, 0.1).unwrap());
    assert_eq!(
        epsilon_robustness_ratio(0.1, 0.0),
        Err(SecurityError::ZeroAcceptance)
    );
}

#[test]
fn model_robustness_examples() {
    assert_eq!(model_robustness(&[0.0; 7]).unwrap(), 0.0);
    assert!((model_robustness(&[0.3; 11]).unwrap() - 0.3).abs() < 1e-15);
    assert_eq!(model_robustness(&[]), Err(SecurityError::EmptyInput));
    assert!(model_robustness(&[0.2, 1.2]).is_err());

    // Per-height p^n with p = 0.4 at depths min_n..=20, summed by hand.
    let mut previous = f64::INFINITY;
    for min_n in 1..=20u32 {
        let values: Vec<f64> = (min_n..=20)
            .map(|n| cascade_breach_probability(0.4, n).unwrap())
            .collect();
        let mut sum = 0.0;
        for n in min_n..=20 {
            let mut term = 1.0;
            for _ in 0..n {
                term *= 0.4;
            }
            sum += term;
        }
        let brute = sum / f64::from(21 - min_n);
        let mean = model_robustness(&values).unwrap();
        assert!((mean - brute).abs() < 1e-15, "min_n {min_n}");
        assert!(mean < previous, "not decreasing at {min_n}");
        previous = mean;
    }
}

#[test]
fn depth_for_digits_is_strict() {
    assert_eq!(depth_for_digits(0.1, 5), Some(6));
    assert_eq!(depth_for_digits(0.0, 5), None);
    assert_eq!(depth_for_digits(1.0, 5), None);
    for p in [0.01, 0.1, 0.2, 0.3, 0.45, 0.499] {
        let n = depth_for_digits(p, 6).unwrap();
        assert!(cascade_breach_probability(p, n).unwrap() < 1e-6, "{p}");
        assert!(cascade_breach_probability(p, n - 1).unwrap() >= 1e-6 * (1.0 - 1e-12));
    }
}

#[test]
fn sim_result_serializes_as_record() {
    let r = sim(0.3, 2, 1000, 4);
    let json = serde_json::to_value(&r).unwrap();
    for key in ["estimate", "stderr", "trials", "seed", "truncation_bound"] {
        assert!(json.get(key).is_some(), "{key}");
    }
    let back: SimResult = serde_json::from_value(json).unwrap();
    assert_eq!(back, r);
}

proptest! {
    #[test]
    fn catch_up_decreases_in_depth(q in 0.01f64..0.49, z in 1u64..50) {
        prop_assert!(catch_up_probability(q, z + 1) < catch_up_probability(q, z));
    }

    #[test]
    fn catch_up_increases_in_share(a in 0.0f64..0.49, gap in 1e-6f64..0.01, z in 1u64..50) {
        let b = (a + gap).min(0.4999);
        prop_assume!(b > a);
        prop_assert!(catch_up_probability(a, z) < catch_up_probability(b, z));
    }

    #[test]
    fn catch_up_is_a_probability(q in 0.0f64..1.0, z in 0u64..1000) {
        let v = catch_up_probability(q, z);
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn cascade_within_per_level_bound(eps in 0.0f64..=1.0, frac in 0.0f64..=1.0, n in 1u32..40) {
        let p = eps * frac;
        let bound = cascade_breach_probability(eps, n).unwrap();
        prop_assert!(cascade_breach_probability(p, n).unwrap() <= bound);
    }

    #[test]
    fn cascade_vanishes_monotonically(p in 0.001f64..0.5, n in 1u32..60) {
        let a = cascade_breach_probability(p, n).unwrap();
        let b = cascade_breach_probability(p, n + 1).unwrap();
        prop_assert!(b < a || a == 0.0);
        let threshold = (-6.0 / p.log10()).ceil() as u32;
        if n >= threshold {
            // Only an exact power of ten can land on the bound itself.
            prop_assert!(a <= 1e-6 * (1.0 + 1e-12), "{p}^{n} = {a}");
        }
    }

    #[test]
    fn exact_and_float_cascade_agree(digits in 1u32..999, n in 1u32..12) {
        let text = format!("0.{digits:03}");
        let exact = cascade_breach_exact(&text.parse().unwrap(), n).unwrap().to_f64();
        let float = cascade_breach_probability(text.parse().unwrap(), n).unwrap();
        prop_assert!((exact - float).abs() <= 1e-12 * exact.max(1e-300));
    }

    #[test]
    fn mean_of_constant(p in 0.0f64..=1.0, h in 1usize..100) {
        let m = model_robustness(&vec![p; h]).unwrap();
        prop_assert!((m - p).abs() <= 1e-12);
    }

    #[test]
    fn small_sims_are_probabilities(q in 0.0f64..0.6, z in 0u64..6, seed in any::<u64>()) {
        let r = sim(q, z, 500, seed);
        prop_assert!((0.0..=1.0).contains(&r.estimate));
        // Every walk ends exactly one way.
        prop_assert_eq!(r.successes + r.horizon_hits + r.abandoned, r.trials);
    }
}
