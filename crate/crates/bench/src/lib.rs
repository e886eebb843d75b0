//! Fixtures shared by the benchmarks in `benches/`.

use mvsk_core::synth::{generate, SynthConfig};
use mvsk_core::{build_moment_model, LambdaPoint, MomentModel};

/// Moment model of seeded synthetic returns.
pub fn fixture_model(n: usize, m: usize) -> MomentModel {
    let table = generate(&SynthConfig { n, m, seed: 7 }).expect("valid synthetic config");
    build_moment_model(&table).expect("synthetic data has enough samples")
}

/// A hyper-parameter with weight on every objective.
pub fn mixed_lambda() -> LambdaPoint {
    LambdaPoint::new([0.25, 0.25, 0.25, 0.25]).expect("weights sum to one")
}
