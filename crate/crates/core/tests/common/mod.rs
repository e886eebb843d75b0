#![allow(dead_code)]

use mvsk_core::{build_moment_model, LambdaPoint, MomentModel, ReturnsMatrix};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

/// Skewed, heavy-tailed returns: a normal body plus occasional signed jumps.
pub fn random_returns(rng: &mut ChaCha8Rng, n: usize, m: usize) -> ReturnsMatrix {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| {
            let scale = rng.gen_range(0.005..0.03);
            let drift = rng.gen_range(-0.002..0.004);
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            (0..m)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    let jump = if rng.gen_bool(0.05) {
                        let e: f64 = Exp1.sample(rng);
                        sign * 3.0 * scale * e
                    } else {
                        0.0
                    };
                    drift + scale * z + jump
                })
                .collect()
        })
        .collect();
    ReturnsMatrix::from_rows(&rows).unwrap()
}

pub fn random_model(rng: &mut ChaCha8Rng, n: usize, m: usize) -> MomentModel {
    build_moment_model(&random_returns(rng, n, m)).unwrap()
}

/// Uniform draw from the probability simplex of dimension `d`.
pub fn random_simplex_point(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let e: Vec<f64> = (0..d).map(|_| Exp1.sample(rng)).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

pub fn random_lambda(rng: &mut ChaCha8Rng) -> LambdaPoint {
    let v = random_simplex_point(rng, 4);
    LambdaPoint::normalized([v[0], v[1], v[2], v[3]]).unwrap()
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}
