use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use reglab_bench::{dense, weighted_shift};
use reglab_core::dense::{singular_values, smallest_singular_value, Lu};
use reglab_core::dilation::{example_gadget, kernel_data, ransford_sigma_min};
use reglab_core::radius::{gamma_sequence, window_spectral_radius, WindowSchedule};
use reglab_core::resolvent::shift_left_resolvent;
use reglab_core::{OperatorExpr, TailBoundedVector, C64};

fn dense_kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("dense");
    for n in [32, 128] {
        let a = dense(n, 7);
        g.bench_with_input(BenchmarkId::new("lu", n), &a, |b, a| {
            b.iter(|| Lu::factor(black_box(a)).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("singular_values", n), &a, |b, a| {
            b.iter(|| singular_values(black_box(a)))
        });
        g.bench_with_input(BenchmarkId::new("sigma_min", n), &a, |b, a| {
            b.iter(|| smallest_singular_value(black_box(a), 1e-12).unwrap())
        });
    }
    g.finish();
}

fn operator_kernels(c: &mut Criterion) {
    let u = OperatorExpr::shift();
    let geo = OperatorExpr::geometric_inverse(C64::new(0.5, 0.0), &u);
    let x = TailBoundedVector::from_real(&[1.0; 64]);
    c.bench_function("geometric_inverse_apply", |b| {
        b.iter(|| geo.apply(black_box(&x)).unwrap())
    });
    c.bench_function("truncate_weighted_shift_128", |b| {
        b.iter(|| weighted_shift().truncate(black_box(128)).unwrap())
    });
}

fn radius_kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("radius");
    g.sample_size(10);
    let t = weighted_shift();
    g.bench_function("gamma_sequence_k8", |b| {
        b.iter(|| gamma_sequence(black_box(&t), 8, WindowSchedule::linear()).unwrap())
    });
    let s = OperatorExpr::weighted_backward_shift(&[1.0, 0.25]).unwrap();
    g.bench_function("window_spectral_radius_64", |b| {
        b.iter(|| window_spectral_radius(black_box(&s), 64).unwrap())
    });
    g.finish();
}

fn dilation_kernels(c: &mut Criterion) {
    let mut g = c.benchmark_group("dilation");
    g.sample_size(10);
    let l = shift_left_resolvent();
    let t = OperatorExpr::shift();
    let z = C64::new(0.3, 0.0);
    g.bench_function("kernel_data_w32", |b| {
        b.iter(|| kernel_data(&l, &t, black_box(z), 32).unwrap())
    });
    g.bench_function("example_gadget", |b| {
        b.iter(|| example_gadget(black_box(z), 1e-15).unwrap())
    });
    g.bench_function("ransford_sigma_min_512", |b| {
        b.iter(|| ransford_sigma_min(C64::new(1.0, 0.0), black_box(C64::new(1.2, 0.0)), 512).unwrap())
    });
    g.finish();
}

criterion_group!(
    benches,
    dense_kernels,
    operator_kernels,
    radius_kernels,
    dilation_kernels
);
criterion_main!(benches);
