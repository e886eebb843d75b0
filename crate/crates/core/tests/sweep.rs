mod common;

use mvsk_core::sweep::{dominates, SweepEntry};
use mvsk_core::*;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;

fn model(seed: u64) -> MomentModel {
    random_model(&mut ChaCha8Rng::seed_from_u64(seed), 4, 80)
}

fn sweep(model: &MomentModel, grid: &LambdaGrid, warm_start: bool) -> SweepResult {
    let opts = SweepOptions {
        warm_start,
        ..SweepOptions::default()
    };
    scale_values(run_sweep(model, &Domain::simplex(), grid, &opts).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn scaled_values_span_the_unit_interval(seed in any::<u64>()) {
        let model = model(seed);
        let s = sweep(&model, &build_grid(5, true).unwrap(), true);
        for obj in 0..4 {
            let vals: Vec<f64> = s.scaled_values.iter().flatten().map(|v| v[obj]).collect();
            prop_assert!(vals.iter().all(|v| (0.0..=1.0).contains(v)));
            let raw: Vec<f64> = s.entries.iter().filter_map(|e| e.result()).map(|r| r.objectives.as_array()[obj]).collect();
            let spread = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max) - raw.iter().copied().fold(f64::INFINITY, f64::min);
            if spread > 0.0 {
                prop_assert!(vals.contains(&0.0) && vals.contains(&1.0));
            }
        }
        prop_assert!(s.aggregate.iter().flatten().all(|a| (0.0..=4.0).contains(a)));
        let total: f64 = support_histogram(&s).values().sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn superior_set_grows_with_eta(seed in any::<u64>(), a in 0.001f64..0.5, b in 0.001f64..0.5) {
        let model = model(seed);
        let s = sweep(&model, &build_grid(4, true).unwrap(), true);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let small = superior_set(&s, lo).unwrap();
        let large = superior_set(&s, hi).unwrap();
        prop_assert!(small.iter().all(|x| large.contains(x)));
        prop_assert!(!small.is_empty());
    }

    #[test]
    fn cold_start_ignores_grid_order(seed in any::<u64>()) {
        let model = model(seed);
        let grid = build_grid(4, true).unwrap();
        let mut reversed = grid.clone();
        reversed.points.reverse();
        let forward = sweep(&model, &grid, false);
        let backward = sweep(&model, &reversed, false);
        let n = grid.len();
        for i in 0..n {
            let a = forward.entries[i].result().unwrap();
            let b = backward.entries[n - 1 - i].result().unwrap();
            prop_assert_eq!(&a.w, &b.w);
        }
    }

    #[test]
    fn warm_start_matches_cold_start_on_convex_points(seed in any::<u64>()) {
        let model = model(seed);
        let grid = build_grid(5, true).unwrap();
        let warm = sweep(&model, &grid, true);
        let cold = sweep(&model, &grid, false);
        for (w, c) in warm.entries.iter().zip(&cold.entries) {
            if w.region.is_domain_convex() {
                let (a, b) = (w.result().unwrap().scalarized_value, c.result().unwrap().scalarized_value);
                prop_assert!((a - b).abs() <= 1e-8, "{:?}: {a} vs {b}", w.point.lambda);
            }
        }
    }
}

#[test]
fn convex_interior_points_are_not_dominated() {
    let model = model(31);
    let s = sweep(&model, &build_grid(8, true).unwrap(), true);
    assert!(non_domination_check(&s, None, mvsk_core::sweep::DOMINANCE_MARGIN).is_empty());
}

#[test]
fn custom_restriction_selects_entries() {
    let model = model(32);
    let s = sweep(&model, &build_grid(3, true).unwrap(), true);
    let none = |_: &SweepEntry| false;
    assert!(non_domination_check(&s, Some(&none), 0.0).is_empty());
}

#[test]
fn dominance_respects_orientation() {
    let a = ObjectiveValues {
        f1: 1.0,
        f2: 1.0,
        f3: 1.0,
        f4: 1.0,
    };
    let better = ObjectiveValues {
        f1: 1.1,
        f2: 0.9,
        f3: 1.0,
        f4: 1.0,
    };
    let worse_mean = ObjectiveValues {
        f1: 0.9,
        f2: 0.5,
        f3: 1.0,
        f4: 1.0,
    };
    assert!(dominates(&better, &a, 0.0));
    assert!(!dominates(&a, &better, 0.0));
    assert!(!dominates(&worse_mean, &a, 0.0));
    assert!(!dominates(&better, &a, 0.2));
}

#[test]
fn eta_outside_unit_interval_is_rejected() {
    let model = model(33);
    let s = sweep(&model, &build_grid(2, true).unwrap(), true);
    assert!(superior_set(&s, 0.0).is_err());
    assert!(superior_set(&s, 1.0).is_err());
}
