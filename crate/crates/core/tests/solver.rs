mod common;

use mvsk_core::solver::{support_of, REFERENCE_BUDGET, SUPPORT_EPSILON};
use mvsk_core::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

/// A random model and a λ that is convex on the domain.
fn convex_instance(seed: u64, cube: bool) -> (MomentModel, LambdaPoint, Domain) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.gen_range(2..=8);
    let model = random_model(&mut rng, n, 60);
    let domain = if cube {
        Domain::cube(1.0).unwrap()
    } else {
        Domain::simplex()
    };
    let bounds = model.bounds().unwrap().for_domain(domain.kind);
    loop {
        let lambda = random_lambda(&mut rng);
        if classify_lambda(&lambda, bounds).is_domain_convex() {
            return (model, lambda, domain);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn result_is_feasible_and_consistent(seed in any::<u64>(), cube in any::<bool>()) {
        let (model, lambda, domain) = convex_instance(seed, cube);
        let r = solve(&model, &lambda, &domain, &SolverOptions::default(), None).unwrap();
        prop_assert!(domain.infeasibility(&r.w) <= 1e-10);
        let v = eval_scalarized(&model, &lambda, &r.w).unwrap();
        prop_assert!((r.scalarized_value - v).abs() <= 1e-12 * (1.0 + v.abs()));
        prop_assert_eq!(r.support.clone(), support_of(&r.w));
        prop_assert!(r.support.iter().all(|&i| r.w[i].abs() > SUPPORT_EPSILON));
        prop_assert_eq!(r.iterations_used, 2000);
    }

    #[test]
    fn reaches_reference_on_convex_instances(seed in any::<u64>(), cube in any::<bool>()) {
        let (model, lambda, domain) = convex_instance(seed, cube);
        let got = solve(&model, &lambda, &domain, &SolverOptions::default(), None).unwrap().scalarized_value;
        let reference = scalarized_reference(&model, &lambda, &domain, REFERENCE_BUDGET).unwrap();
        prop_assert!(got - reference <= 1e-6 * (1.0 + reference.abs()));
    }

    #[test]
    fn gap_stays_inside_the_accelerated_envelope(seed in any::<u64>()) {
        let (model, lambda, domain) = convex_instance(seed, false);
        let opts = SolverOptions { record_trace: true, ..SolverOptions::default() };
        let r = solve(&model, &lambda, &domain, &opts, None).unwrap();
        let reference = solve(&model, &lambda, &domain, &SolverOptions { max_iterations: REFERENCE_BUDGET, ..opts }, None).unwrap();
        let start = domain.default_start(model.n());
        let radius2 = dist(&start, &reference.w).powi(2);
        let c = 2.0 * r.lipschitz_estimate * radius2;
        let trace = r.trace.unwrap();
        for k in [10usize, 100, 1000] {
            let best = trace[..k].iter().copied().fold(f64::INFINITY, f64::min);
            let gap = best - reference.scalarized_value;
            prop_assert!(gap <= c / ((k + 1) as f64).powi(2) + 1e-12, "k={k}: gap {gap:e}, C {c:e}");
        }
    }

    #[test]
    fn best_iterate_is_trace_minimum(seed in any::<u64>()) {
        let (model, lambda, domain) = convex_instance(seed, false);
        let opts = SolverOptions { record_trace: true, max_iterations: 300, ..SolverOptions::default() };
        let r = solve(&model, &lambda, &domain, &opts, None).unwrap();
        let trace = r.trace.unwrap();
        prop_assert_eq!(trace.len(), 300);
        let min = trace.iter().copied().fold(f64::INFINITY, f64::min);
        prop_assert!(r.scalarized_value <= min + 1e-15 * (1.0 + min.abs()));
    }

    #[test]
    fn warm_starts_agree_on_global_convex(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..=6);
        let model = random_model(&mut rng, n, 60);
        let lambda = loop {
            let l = random_lambda(&mut rng);
            if classify_lambda(&l, Bounds { lower: 0.0, upper: 0.0 }) == RegionLabel::GlobalConvex {
                break l;
            }
        };
        let domain = Domain::simplex();
        let values: Vec<f64> = (0..3)
            .map(|_| {
                let start = random_simplex_point(&mut rng, n);
                scalarized_reference_from(&model, &lambda, &domain, &start)
            })
            .collect();
        for v in &values {
            prop_assert!((v - values[0]).abs() <= 1e-8, "{values:?}");
        }
    }
}

fn scalarized_reference_from(model: &MomentModel, lambda: &LambdaPoint, domain: &Domain, start: &[f64]) -> f64 {
    let opts = SolverOptions {
        max_iterations: REFERENCE_BUDGET,
        ..SolverOptions::default()
    };
    solve(model, lambda, domain, &opts, Some(start))
        .unwrap()
        .scalarized_value
}

#[test]
fn pure_mean_reference_is_best_asset() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let model = random_model(&mut rng, 5, 40);
    let lambda = LambdaPoint::new([1.0, 0.0, 0.0, 0.0]).unwrap();
    let best = model.mean().iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let v = scalarized_reference(&model, &lambda, &Domain::simplex(), REFERENCE_BUDGET).unwrap();
    assert_eq!(v, -best);
}

#[test]
fn quadratic_reference_is_exact() {
    let quad = MomentModel::from_tensors(vec![0.0; 2], vec![1.0, 0.0, 0.0, 2.0], vec![0.0; 8], vec![0.0; 16]).unwrap();
    let lambda = LambdaPoint::new([0.0, 1.0, 0.0, 0.0]).unwrap();
    let v = scalarized_reference(&quad, &lambda, &Domain::simplex(), REFERENCE_BUDGET).unwrap();
    assert!((v - 2.0 / 3.0).abs() < 1e-10);
}

#[test]
fn warm_start_is_projected_and_validated() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let model = random_model(&mut rng, 3, 30);
    let lambda = random_lambda(&mut rng);
    let opts = SolverOptions {
        max_iterations: 1,
        ..SolverOptions::default()
    };
    let r = solve(&model, &lambda, &Domain::simplex(), &opts, Some(&[5.0, -1.0, 0.0])).unwrap();
    assert!(Domain::simplex().infeasibility(&r.w) <= 1e-12);
    assert!(solve(&model, &lambda, &Domain::simplex(), &opts, Some(&[f64::NAN, 0.0, 0.0])).is_err());
    assert!(solve(&model, &lambda, &Domain::simplex(), &opts, Some(&[0.5, 0.5])).is_err());
}
