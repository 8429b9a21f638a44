use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use hound_core::coefficients::{run_identity_suite, GainTable};
use hound_core::{Differentiator, DifferentiatorConfig, Sample, SignalSpec};

fn bench_updates(c: &mut Criterion) {
    let mut group = c.benchmark_group("update_throughput");
    for order in [2usize, 5, 16] {
        group.bench_function(format!("order_{order}"), |b| {
            let signal = SignalSpec::polynomial(&[5.0, -0.004, 0.0003]).with_noise(0.7, 99);
            b.iter(|| {
                let mut diff = Differentiator::new(
                    DifferentiatorConfig::new(order),
                    Sample::new(0.0, signal.sample_at(0.0, 0)),
                )
                .unwrap();
                for step in 1..=10_000u64 {
                    let t = step as f64;
                    diff.update(Sample::new(t, signal.sample_at(t, step)))
                        .unwrap();
                }
                black_box(diff.estimates()[0])
            });
        });
    }
    group.finish();
}

fn bench_gain_table(c: &mut Criterion) {
    c.bench_function("gain_table_order_16", |b| {
        b.iter(|| GainTable::new(black_box(16)).unwrap())
    });
}

fn bench_identity_suite(c: &mut Criterion) {
    c.bench_function("identity_suite_order_12", |b| {
        b.iter(|| run_identity_suite(black_box(12)).unwrap())
    });
}

fn bench_coefficient_extraction(c: &mut Criterion) {
    let signal = SignalSpec::polynomial(&[5.0, -0.004, 0.0003, -0.00002, 0.000001]);
    let mut diff = Differentiator::new(
        DifferentiatorConfig::new(5),
        Sample::new(0.0, signal.clean_value(0.0)),
    )
    .unwrap();
    for step in 1..=20_000u64 {
        let t = step as f64;
        diff.update(Sample::new(t, signal.clean_value(t))).unwrap();
    }
    let model = diff.taylor_model();
    c.bench_function("poly_coefficients_order_5", |b| {
        b.iter(|| black_box(&model).poly_coefficients())
    });
}

criterion_group!(
    benches,
    bench_updates,
    bench_gain_table,
    bench_identity_suite,
    bench_coefficient_extraction
);
criterion_main!(benches);
