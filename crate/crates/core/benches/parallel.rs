//! Sequential vs rayon execution for the data-parallel paths. Without the
//! `parallel` feature both variants run sequentially.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use feg_core::analysis::{certify, estimate_lipschitz, PairSampler};
use feg_core::problems::{make_bilinear, random_negative_comonotone};
use feg_core::solvers::run_feg;
use feg_core::stochastic::{run_sfeg_trials, schedule_for_epsilon, NoiseModel};
use feg_core::{Execution, Point};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn monte_carlo(c: &mut Criterion) {
    let p = make_bilinear(1.0).unwrap();
    let z0 = Point::new(vec![1.0, 0.0]).unwrap();
    let noise = NoiseModel::gaussian(schedule_for_epsilon(0.1, 50).unwrap(), 1);
    let mut g = c.benchmark_group("sfeg_trials_1000x50");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| run_sfeg_trials(&p, &noise, &z0, 50, 1000, black_box(exec)).unwrap())
        });
    }
    g.finish();
}

fn lipschitz_estimate(c: &mut Criterion) {
    let p = random_negative_comonotone(3, 20, -0.05).unwrap();
    let s = PairSampler::uniform_box(4, 20, -1.0, 1.0).unwrap();
    let mut g = c.benchmark_group("estimate_lipschitz_50k_pairs");
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| estimate_lipschitz(&p.operator, &s, 50_000, black_box(exec)).unwrap())
        });
    }
    g.finish();
}

fn certificate(c: &mut Criterion) {
    let p = random_negative_comonotone(5, 20, -0.05).unwrap();
    let z0 = Point::new(vec![0.5; 20]).unwrap();
    let t = run_feg(&p, &z0, 20_000).unwrap();
    let mut g = c.benchmark_group("certify_20k_iterates");
    g.sample_size(20);
    for (name, exec) in MODES {
        g.bench_function(BenchmarkId::from_parameter(name), |b| {
            b.iter(|| certify(&p, &t, black_box(exec)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, monte_carlo, lipschitz_estimate, certificate);
criterion_main!(benches);
