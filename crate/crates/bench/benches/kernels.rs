use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use jacobi_gap_bench::{precision, real, table, weight, BENCH_BITS};
use jacobi_gap_core::fredholm::sine_kernel_det;
use jacobi_gap_core::ladder::{default_z_samples, identity_residuals};
use jacobi_gap_core::numerics::gauss_jacobi_rule;
use jacobi_gap_core::orthopoly::build_table;

fn quadrature(c: &mut Criterion) {
    let mut g = c.benchmark_group("gauss_jacobi_rule");
    for bits in BENCH_BITS {
        let prec = precision(bits);
        let (p, q) = (real(0.5, prec), real(1.0, prec));
        g.bench_with_input(BenchmarkId::new("m64", bits), &bits, |b, _| {
            b.iter(|| gauss_jacobi_rule(black_box(64), &p, &q, prec).unwrap())
        });
    }
    g.finish();
}

fn recurrence(c: &mut Criterion) {
    let mut g = c.benchmark_group("build_table");
    g.sample_size(10);
    for bits in BENCH_BITS {
        let prec = precision(bits);
        let wp = weight(prec);
        g.bench_with_input(BenchmarkId::new("n32", bits), &bits, |b, _| {
            b.iter(|| build_table(&wp, black_box(32), prec).unwrap())
        });
    }
    g.finish();
}

fn identities(c: &mut Criterion) {
    let prec = precision(256);
    let t = table(18, prec);
    let z = default_z_samples(prec);
    c.bench_function("identity_residuals/n16", |b| {
        b.iter(|| identity_residuals(&t, black_box(16), &z).unwrap())
    });
}

fn fredholm(c: &mut Criterion) {
    let mut g = c.benchmark_group("sine_kernel_det");
    g.sample_size(10);
    let prec = precision(256);
    let t = real(1.0, prec);
    for m in [32usize, 64] {
        g.bench_with_input(BenchmarkId::from_parameter(m), &m, |b, &m| {
            b.iter(|| sine_kernel_det(&t, black_box(m), prec).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, quadrature, recurrence, identities, fredholm);
criterion_main!(benches);
