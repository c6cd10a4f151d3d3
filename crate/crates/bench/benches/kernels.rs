use std::hint::black_box;

use bergman_bench::{exponential_product, ring_points, spiral_product};
use bergman_core::theorems::derivative_integral;
use bergman_core::{QuadOptions, Weight};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use num_complex::Complex64;

fn evaluation(c: &mut Criterion) {
    let pts = ring_points(0.97, 256);
    let mut g = c.benchmark_group("blaschke");
    for n in [8, 32, 128] {
        let b = spiral_product(n);
        g.bench_with_input(BenchmarkId::new("eval", n), &b, |bch, b| {
            bch.iter(|| pts.iter().map(|z| b.eval(z)).sum::<Complex64>())
        });
        g.bench_with_input(BenchmarkId::new("derivative1", n), &b, |bch, b| {
            bch.iter(|| pts.iter().map(|z| b.derivative1(z)).sum::<Complex64>())
        });
    }
    let b = spiral_product(8);
    g.bench_function("derivative3/8", |bch| {
        bch.iter(|| pts.iter().map(|z| b.derivative(z, 3).unwrap()).sum::<Complex64>())
    });
    g.finish();
}

fn graded_integral(c: &mut Criterion) {
    let w = Weight::standard(-0.5).unwrap();
    let opts = QuadOptions::default();
    let mut g = c.benchmark_group("graded_disk_integral");
    g.sample_size(10);
    for n in [5, 10, 20] {
        let b = exponential_product(0.5, n);
        g.bench_with_input(BenchmarkId::new("derivative_norm", n), &b, |bch, b| {
            bch.iter(|| derivative_integral(black_box(b), 1.0, &w, 0.0, false, &opts).unwrap())
        });
    }
    g.finish();
}

fn preimages(c: &mut Criterion) {
    let zeta = Complex64::new(0.3, -0.2);
    let mut g = c.benchmark_group("preimages");
    for n in [4, 8, 16] {
        let b = spiral_product(n);
        g.bench_with_input(BenchmarkId::from_parameter(n), &b, |bch, b| {
            bch.iter(|| b.preimages(black_box(zeta)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, evaluation, graded_integral, preimages);
criterion_main!(benches);
