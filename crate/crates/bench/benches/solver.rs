use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use mvsk_bench::{fixture_model, mixed_lambda};
use mvsk_core::objective::gradient_tensor;
use mvsk_core::{build_grid, gradient, project_simplex, run_sweep, solve, Domain, SolverOptions, SweepOptions};

fn projection(c: &mut Criterion) {
    let mut group = c.benchmark_group("project_simplex");
    for n in [8usize, 20, 64] {
        let x: Vec<f64> = (0..n).map(|i| ((i * 37 % 11) as f64 - 5.0) / 3.0).collect();
        group.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| project_simplex(black_box(x)))
        });
    }
    group.finish();
}

fn gradients(c: &mut Criterion) {
    let model = fixture_model(20, 500);
    let lambda = mixed_lambda();
    let w = vec![1.0 / 20.0; 20];
    let mut group = c.benchmark_group("gradient_n20_m500");
    group.bench_function("samples", |b| {
        b.iter(|| gradient(&model, &lambda, black_box(&w)).unwrap())
    });
    group.bench_function("tensors", |b| {
        b.iter(|| gradient_tensor(&model, &lambda, black_box(&w)).unwrap())
    });
    group.finish();
}

fn solves(c: &mut Criterion) {
    let model = fixture_model(20, 500);
    let lambda = mixed_lambda();
    let opts = SolverOptions::default();
    c.bench_function("solve_simplex_n20", |b| {
        b.iter(|| solve(&model, &lambda, &Domain::simplex(), &opts, None).unwrap())
    });
    let cube = Domain::cube(1.0).unwrap();
    c.bench_function("solve_cube_n20", |b| {
        b.iter(|| solve(&model, &lambda, &cube, &opts, None).unwrap())
    });

    let small = fixture_model(6, 200);
    let grid = build_grid(4, true).unwrap();
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    group.bench_function("s4_n6", |b| {
        b.iter(|| run_sweep(&small, &Domain::simplex(), &grid, &SweepOptions::default()).unwrap())
    });
    group.finish();
}

criterion_group!(benches, projection, gradients, solves);
criterion_main!(benches);
