use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use jointrisk::metrics::auc;
use jointrisk::num::special::bivariate_normal_cdf;
use jointrisk::num::truncnorm::sample_truncated_normal;
use jointrisk::RngStream;

fn bvn(c: &mut Criterion) {
    let mut group = c.benchmark_group("bivariate_normal_cdf");
    for (name, rho) in [("rho_0.3", 0.3), ("rho_0.95", 0.95), ("rho_-0.99", -0.99)] {
        group.bench_function(name, |b| {
            b.iter(|| bivariate_normal_cdf(black_box(-0.4), black_box(1.1), black_box(rho)).unwrap())
        });
    }
    group.finish();
}

fn truncated_normal(c: &mut Criterion) {
    let mut rng = RngStream::new(21);
    c.bench_function("truncnorm_far_tail", |b| {
        b.iter(|| sample_truncated_normal(black_box(0.0), 1.0, 5.0, f64::INFINITY, &mut rng).unwrap())
    });
}

fn auc_10000(c: &mut Criterion) {
    let mut rng = RngStream::new(22);
    let scores: Vec<f64> = (0..10_000).map(|_| rng.uniform()).collect();
    let labels: Vec<bool> = scores.iter().map(|&s| rng.bernoulli(s)).collect();
    c.bench_function("auc_n10000", |b| b.iter(|| auc(black_box(&scores), &labels).unwrap()));
}

criterion_group!(benches, bvn, truncated_normal, auc_10000);
criterion_main!(benches);
