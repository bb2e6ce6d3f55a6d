use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use maxcorr_privacy::bounds::{sweep, SweepConfig};
use maxcorr_privacy::estimation::mmse_monte_carlo;
use maxcorr_privacy::fixtures;
use maxcorr_privacy::privacy::oracle::quantized_oracle;
use maxcorr_privacy::privacy::{solve, Leakage, SolverBudget};
use maxcorr_privacy::stable::{sample_stable_with, GaussianPair, StableFilterSpec, StableParams};
use maxcorr_privacy::Execution;

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn bounds_sweep(c: &mut Criterion) {
    let mut g = c.benchmark_group("bounds_sweep");
    let cfg = SweepConfig { trials: 200, max_dims: 8, seed: 1, ratio_filters: 20 };
    for (name, exec) in MODES {
        g.bench_function(name, |b| b.iter(|| black_box(sweep(&cfg, exec).unwrap())));
    }
    g.finish();
}

fn stable_sampling(c: &mut Criterion) {
    let mut g = c.benchmark_group("stable_sampling");
    let n = 1 << 20;
    for alpha in [1.0, 1.5] {
        let params = StableParams::symmetric(alpha).unwrap();
        for (name, exec) in MODES {
            g.bench_with_input(BenchmarkId::new(name, alpha), &params, |b, p| {
                b.iter(|| black_box(sample_stable_with(p, n, 7, exec).unwrap()))
            });
        }
    }
    g.finish();
}

fn mmse(c: &mut Criterion) {
    let mut g = c.benchmark_group("mmse_monte_carlo");
    let pair = GaussianPair::new(0.8, 1.0).unwrap();
    let filter = StableFilterSpec::for_epsilon(StableParams::standard_gaussian(), 0.5).unwrap();
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| black_box(mmse_monte_carlo(&pair, &filter, 200_000, 64, 3, exec).unwrap()))
        });
    }
    g.finish();
}

fn privacy_solver(c: &mut Criterion) {
    let mut g = c.benchmark_group("privacy_solve");
    let d = fixtures::random_joint(3, 3, 11);
    let budget = SolverBudget { restarts: 16, ..SolverBudget::default() };
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| black_box(solve(&d, Leakage::MutualInformation, 0.1, budget, 5, exec).unwrap()))
        });
    }
    g.finish();
}

fn oracle(c: &mut Criterion) {
    let mut g = c.benchmark_group("quantized_oracle");
    let d = fixtures::dsbs(0.1);
    for (name, exec) in MODES {
        g.bench_function(name, |b| {
            b.iter(|| black_box(quantized_oracle(&d, Leakage::MaximalCorrelation, 0.3, 3, 30, exec).unwrap()))
        });
    }
    g.finish();
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10).measurement_time(Duration::from_secs(5));
    targets = bounds_sweep, stable_sampling, mmse, privacy_solver, oracle
}
criterion_main!(benches);
