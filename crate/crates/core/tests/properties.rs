mod common;

use jcsd_core::sim::{
    calibrate_np_threshold, composition, constant_composition_sequence, exact_binary_errors,
    McCalibration,
};
use jcsd_core::{
    average_cost, chernoff_info, conditional_divergence, empirical_type, finite_n_bounds,
    parse_distribution, parse_problem, per_symbol_mu, rate_for_exponent, region_sweep,
    Criterion, Distribution, TestSpec,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::{random_distribution, random_problem, random_problem_with_outputs};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn mix(a: &Distribution, b: &Distribution, lambda: f64) -> Distribution {
    let probs = a
        .probs()
        .iter()
        .zip(b.probs())
        .map(|(x, y)| lambda * x + (1.0 - lambda) * y)
        .collect();
    Distribution::normalized(probs).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 128,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    #[test]
    fn problem_text_round_trips(seed in any::<u64>(), inputs in 2usize..5) {
        let p = random_problem(&mut rng(seed), inputs);
        let back = parse_problem(&p.to_string()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn parsers_never_panic(text in "\\PC{0,200}") {
        let _ = parse_problem(&text);
        let _ = parse_distribution(&text);
    }

    #[test]
    fn structured_garbage_never_panics(
        lines in proptest::collection::vec(
            prop_oneof![
                Just("x_alphabet 2".to_string()),
                Just("z_alphabet 3".to_string()),
                Just("y_alphabet 2".to_string()),
                Just("comm_channel".to_string()),
                Just("sensing_channel_0".to_string()),
                Just("sensing_channel_1".to_string()),
                Just("cost 0 1".to_string()),
                Just("budget 0.5".to_string()),
                "[0-9. e+-]{0,20}",
            ],
            0..20,
        )
    ) {
        let _ = parse_problem(&lines.join("\n"));
    }

    #[test]
    fn mu_vanishes_at_endpoints_and_is_convex(seed in any::<u64>(), inputs in 2usize..5, s in 0.0f64..1.0, t in 0.0f64..1.0) {
        let mut r = rng(seed);
        let p = random_problem(&mut r, inputs);
        let d = random_distribution(&mut r, inputs);
        prop_assert!(per_symbol_mu(&p, &d, 0.0).unwrap().abs() < 1e-12);
        prop_assert!(per_symbol_mu(&p, &d, 1.0).unwrap().abs() < 1e-12);
        let (ms, mt) = (per_symbol_mu(&p, &d, s).unwrap(), per_symbol_mu(&p, &d, t).unwrap());
        let mid = per_symbol_mu(&p, &d, 0.5 * (s + t)).unwrap();
        prop_assert!(ms <= 1e-12);
        prop_assert!(mid <= 0.5 * (ms + mt) + 1e-12);
    }

    #[test]
    fn chernoff_is_below_both_divergences(seed in any::<u64>(), inputs in 2usize..5) {
        let mut r = rng(seed);
        let p = random_problem(&mut r, inputs);
        let d = random_distribution(&mut r, inputs);
        let c = chernoff_info(&p, &d).unwrap();
        let dwv = conditional_divergence(&p, &d).unwrap();
        let dvw = conditional_divergence(&p.swapped(), &d).unwrap();
        prop_assert!(c.value >= 0.0);
        prop_assert!(c.value <= dwv.min(dvw) + 1e-12);
        prop_assert!((0.0..=1.0).contains(&c.s0));
    }

    #[test]
    fn chernoff_is_convex_in_the_input(seed in any::<u64>(), inputs in 2usize..5, lambda in 0.0f64..1.0) {
        let mut r = rng(seed);
        let p = random_problem(&mut r, inputs);
        let (a, b) = (random_distribution(&mut r, inputs), random_distribution(&mut r, inputs));
        let ca = chernoff_info(&p, &a).unwrap().value;
        let cb = chernoff_info(&p, &b).unwrap().value;
        let cm = chernoff_info(&p, &mix(&a, &b, lambda)).unwrap().value;
        prop_assert!(cm <= lambda * ca + (1.0 - lambda) * cb + 1e-12);
    }

    #[test]
    fn swapping_hypotheses_mirrors_s0(seed in any::<u64>(), inputs in 2usize..5) {
        let mut r = rng(seed);
        let p = random_problem(&mut r, inputs);
        let d = random_distribution(&mut r, inputs);
        let c = chernoff_info(&p, &d).unwrap();
        let swapped = chernoff_info(&p.swapped(), &d).unwrap();
        prop_assert!((c.value - swapped.value).abs() < 1e-12);
        prop_assert!((c.s0 + swapped.s0 - 1.0).abs() < 1e-6);
    }

    #[test]
    fn sequence_mu_is_n_times_type_mu(seed in any::<u64>(), inputs in 2usize..5, n in 1usize..40, s in 0.0f64..1.0) {
        let mut r = rng(seed);
        let p = random_problem(&mut r, inputs);
        let seq: Vec<usize> = (0..n).map(|_| r.gen_range(0..inputs)).collect();
        let direct: f64 = seq
            .iter()
            .map(|&x| {
                let one = Distribution::degenerate(inputs, x);
                per_symbol_mu(&p, &one, s).unwrap()
            })
            .sum();
        let ty = empirical_type(&seq, inputs).unwrap();
        let via_type = n as f64 * per_symbol_mu(&p, &ty, s).unwrap();
        prop_assert!((direct - via_type).abs() <= 1e-10 * (1.0 + direct.abs()));
    }

    #[test]
    fn region_points_are_feasible_and_monotone(seed in any::<u64>(), inputs in 2usize..4, np in any::<bool>()) {
        let p = random_problem(&mut rng(seed), inputs);
        let criterion = if np { Criterion::NeymanPearson } else { Criterion::MaxError };
        let sweep = region_sweep(&p, criterion, 6).unwrap();
        for w in sweep.windows(2) {
            prop_assert!(w[0].exponent <= w[1].exponent);
            prop_assert!(w[1].rate <= w[0].rate + 1e-12);
        }
        for point in &sweep {
            prop_assert!(average_cost(&point.argmax, &p).unwrap() <= p.budget() + 1e-9);
            prop_assert!(criterion.exponent(&p, &point.argmax).unwrap() >= point.exponent - 1e-9);
        }
        let last = sweep.last().unwrap();
        prop_assert!(rate_for_exponent(&p, last.exponent * 1.01 + 1e-6, criterion).is_err());
    }

    #[test]
    fn codeword_type_is_closest_composition(seed in any::<u64>(), inputs in 2usize..6, n in 1usize..80) {
        let d = random_distribution(&mut rng(seed), inputs);
        let seq = constant_composition_sequence(&d, n).unwrap();
        prop_assert_eq!(seq.len(), n);
        prop_assert!(seq.windows(2).all(|w| w[0] <= w[1]));
        let counts = composition(&d, n);
        for (k, p) in counts.iter().zip(d.probs()) {
            prop_assert!((*k as f64 - p * n as f64).abs() < 1.0);
        }
    }

    #[test]
    fn exact_errors_respect_the_sandwich(seed in any::<u64>(), n in 1usize..60) {
        let mut r = rng(seed);
        let p = random_problem_with_outputs(&mut r, 2, 2);
        let ones = r.gen_range(0..=n);
        let ty = Distribution::from_counts(&[n - ones, ones]).unwrap();
        let e = exact_binary_errors(&p, &ty, n, TestSpec::Map).unwrap();
        let b = finite_n_bounds(&p, &ty, n).unwrap();
        prop_assert!(e.log_max() <= b.log_upper + 1e-9);
        prop_assert!(e.log_max() >= b.log_lower_floor - 1e-9);
    }

    #[test]
    fn exact_errors_depend_only_on_the_type(seed in any::<u64>(), n in 1usize..30) {
        let mut r = rng(seed);
        let p = jcsd_core::presets::example_one(0.11, r.gen_range(0.05..0.45), 1.0).unwrap();
        let mut seq: Vec<usize> = (0..n).map(|_| r.gen_range(0..2)).collect();
        let first = exact_binary_errors(&p, &empirical_type(&seq, 2).unwrap(), n, TestSpec::Map).unwrap();
        seq.shuffle(&mut r);
        let second = exact_binary_errors(&p, &empirical_type(&seq, 2).unwrap(), n, TestSpec::Map).unwrap();
        prop_assert_eq!(first, second);
    }

    #[test]
    fn np_threshold_is_monotone_in_alpha(q in 0.05f64..0.45, n in 5usize..80, a in 0.01f64..0.5, b in 0.01f64..0.5) {
        let p = jcsd_core::presets::example_one(0.11, q, 1.0).unwrap();
        let ty = Distribution::degenerate(2, 1);
        let tau = |alpha: f64| match calibrate_np_threshold(&p, &ty, n, alpha, &McCalibration::default()).unwrap() {
            TestSpec::Lrt { tau } => tau,
            other => panic!("{other:?}"),
        };
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        // ε0 = P_W[LLR < τ] grows with τ, so a looser α admits a larger τ.
        prop_assert!(tau(lo) <= tau(hi));
        let e = exact_binary_errors(&p, &ty, n, TestSpec::Lrt { tau: tau(lo) }).unwrap();
        prop_assert!(e.eps0 <= lo + 1e-12);
    }
}
