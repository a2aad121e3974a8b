use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use stableopt_core::testbed::POLY_BOUNDS;
use stableopt_core::{
    build_neighborhoods, stableopt_step, ConfidenceField, DistanceSpec, DomainPosterior, FiniteDomain, KernelSpec,
};

fn neighborhoods(c: &mut Criterion) {
    let grid = FiniteDomain::grid(&POLY_BOUNDS, &[50, 50]).unwrap();
    c.bench_function("neighborhoods_50x50", |b| {
        b.iter(|| build_neighborhoods(black_box(grid.clone()), DistanceSpec::L2, 0.5).unwrap())
    });
}

fn posterior_updates(c: &mut Criterion) {
    let grid = FiniteDomain::grid(&POLY_BOUNDS, &[50, 50]).unwrap();
    let kernel = KernelSpec::se_ard(vec![0.8, 0.8], 1.0);
    c.bench_function("domain_posterior_100_observations", |b| {
        b.iter(|| {
            let mut dp = DomainPosterior::new(&kernel, 0.01, &grid).unwrap();
            for k in 0..100 {
                dp.observe((k * 613) % grid.len(), k as f64 * 0.01).unwrap();
            }
            black_box(dp.variance(0))
        })
    });
}

fn acquisition(c: &mut Criterion) {
    let grid = FiniteDomain::grid(&POLY_BOUNDS, &[50, 50]).unwrap();
    let pset = build_neighborhoods(grid, DistanceSpec::L2, 0.5).unwrap();
    let kernel = KernelSpec::se_ard(vec![0.8, 0.8], 1.0);
    let mut dp = DomainPosterior::new(&kernel, 0.01, pset.domain()).unwrap();
    for k in 0..30 {
        dp.observe((k * 613) % pset.len(), (k as f64).sin()).unwrap();
    }
    let field = ConfidenceField::from_moments(dp.means(), &dp.variances(), 2.0);
    c.bench_function("stableopt_step_50x50", |b| {
        b.iter(|| stableopt_step(black_box(&field), &pset).unwrap())
    });
}

criterion_group!(benches, neighborhoods, posterior_updates, acquisition);
criterion_main!(benches);
