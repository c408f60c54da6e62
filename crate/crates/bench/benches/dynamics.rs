use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use hkdelay::meanfield::{w1_1d, EmpiricalMeasure};
use hkdelay::model::{self, WeightScheme};
use hkdelay::rng::SplitMix64;

use hkdelay_bench::{params, random_points, simulation};

fn bench_rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs");
    for &n in &[20usize, 160] {
        for scheme in [WeightScheme::Classical, WeightScheme::NormalizedNoSelf] {
            let p = params(n, 3, scheme);
            let current = random_points(n, 3, 1);
            let delayed = random_points(n, 3, 2);
            group.bench_with_input(
                BenchmarkId::new(scheme.label(), n),
                &n,
                |b, _| {
                    b.iter(|| {
                        model::rhs(black_box(&p), black_box(&current), black_box(&delayed))
                            .expect("rhs")
                    })
                },
            );
        }
    }
    group.finish();
}

fn bench_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    for &n in &[20usize, 160] {
        group.bench_with_input(BenchmarkId::new("classical_d3", n), &n, |b, _| {
            let mut sim = simulation(n, 3, WeightScheme::Classical);
            b.iter(|| sim.step().expect("step"));
        });
    }
    group.finish();
}

fn bench_w1(c: &mut Criterion) {
    let mut group = c.benchmark_group("w1");
    let mut rng = SplitMix64::new(3);
    let mut sorted = |n: usize| {
        let mut v: Vec<f64> = (0..n).map(|_| rng.uniform(0.0, 10.0)).collect();
        v.sort_by(|a, b| a.total_cmp(b));
        v
    };
    for &n in &[160usize, 1600] {
        let a = sorted(n);
        let b_samples = sorted(n);
        group.bench_with_input(BenchmarkId::new("sorted_1d", n), &n, |b, _| {
            b.iter(|| w1_1d(black_box(&a), black_box(&b_samples)).expect("w1"))
        });
    }
    let mu = EmpiricalMeasure::new(random_points(160, 3, 5), 0.0).expect("measure");
    let nu = EmpiricalMeasure::new(random_points(160, 3, 6), 0.0).expect("measure");
    group.bench_function("projected_160x3", |b| {
        b.iter(|| hkdelay::meanfield::w1_projected(black_box(&mu), black_box(&nu)).expect("w1"))
    });
    group.finish();
}

criterion_group!(benches, bench_rhs, bench_step, bench_w1);
criterion_main!(benches);
