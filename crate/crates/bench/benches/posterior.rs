use std::hint::black_box;

use c2lse::gp::fit_hyperparameters;
use c2lse::gp::{HyperBounds, HyperFitOptions};
use c2lse_bench::mc2d_posterior;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn mean_var(c: &mut Criterion) {
    let mut group = c.benchmark_group("mean_var");
    for t in [10, 50, 100] {
        let (_, gp) = mc2d_posterior(t);
        group.bench_with_input(BenchmarkId::from_parameter(t), &gp, |b, gp| {
            b.iter(|| gp.mean_var(black_box(&[4.2, 1.7])).unwrap())
        });
    }
    group.finish();
}

fn refit(c: &mut Criterion) {
    let mut group = c.benchmark_group("fit_posterior");
    for t in [10, 50, 100] {
        let (_, gp) = mc2d_posterior(t);
        group.bench_with_input(BenchmarkId::from_parameter(t), &gp, |b, gp| {
            b.iter(|| c2lse::GPosterior::fit_with_prior_mean(gp.kernel().clone(), gp.observations().clone(), gp.prior_mean()).unwrap())
        });
    }
    group.finish();
}

fn hyperparameters(c: &mut Criterion) {
    let (problem, gp) = mc2d_posterior(30);
    let mut opts = HyperFitOptions::new(HyperBounds::for_widths(&problem.bounds.widths()));
    opts.prior_mean = problem.threshold;
    let starts = [gp.kernel().clone()];
    c.bench_function("fit_hyperparameters/30", |b| {
        b.iter(|| fit_hyperparameters(gp.observations(), &starts, &opts).unwrap())
    });
}

criterion_group!(benches, mean_var, refit, hyperparameters);
criterion_main!(benches);
