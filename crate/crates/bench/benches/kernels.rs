use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use lyapunov_core::sigma::j_integrals;
use lyapunov_core::specfun::{digamma, trigamma};
use lyapunov_core::{chain_rng, run_chain, stability_exponents, Beta, EnsembleSpec, SigmaSpec};

fn special_functions(c: &mut Criterion) {
    let xs: Vec<f64> = (1..=64).map(|i| i as f64 * 0.37).collect();
    c.bench_function("digamma/64", |b| {
        b.iter(|| xs.iter().map(|&x| digamma(black_box(x)).unwrap()).sum::<f64>())
    });
    c.bench_function("trigamma/64", |b| {
        b.iter(|| xs.iter().map(|&x| trigamma(black_box(x)).unwrap()).sum::<f64>())
    });
}

fn j_quadrature(c: &mut Criterion) {
    let mut group = c.benchmark_group("j_integrals");
    for d in [2, 5, 10] {
        let y = SigmaSpec::new((1..=d).map(|k| 0.5 + k as f64 * 0.3).collect()).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(d), &y, |b, y| {
            b.iter(|| j_integrals(Beta::Real, black_box(y)).unwrap())
        });
    }
    group.finish();
}

fn chains(c: &mut Criterion) {
    const STEPS: usize = 2_000;
    let mut group = c.benchmark_group("chain");
    group.throughput(Throughput::Elements(STEPS as u64));
    for beta in Beta::ALL {
        for d in [2, 5] {
            let spec = EnsembleSpec::StandardGaussian { beta, d };
            group.bench_function(format!("beta{beta}/d{d}"), |b| {
                b.iter(|| run_chain(&spec, d, STEPS, &mut chain_rng(1, 0)).unwrap())
            });
        }
    }
    group.finish();

    let spec = EnsembleSpec::StandardGaussian {
        beta: Beta::Complex,
        d: 3,
    };
    c.bench_function("stability_exponents/d3/N500", |b| {
        b.iter(|| stability_exponents(&spec, 500, &mut chain_rng(2, 0)).unwrap())
    });
}

criterion_group!(benches, special_functions, j_quadrature, chains);
criterion_main!(benches);
