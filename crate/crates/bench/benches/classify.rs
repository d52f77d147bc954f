//! Benchmarks for the SVM training stack: the SMO solver on a precomputed
//! kernel, cross-validated grid search, and one-vs-one multiclass training.

use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};
use pansharp_core::classify::{grid_search, rbf_kernel, smo_solve, svm_train_multiclass, SmoParams};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Gaussian-free blob sampler: uniform squares of half-width `spread` around
/// each class center, deterministic in `seed`.
fn blobs(per_class: usize, centers: &[[f64; 2]], spread: f64, seed: u64) -> (Vec<Vec<f64>>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut features = Vec::with_capacity(per_class * centers.len());
    let mut labels = Vec::with_capacity(per_class * centers.len());
    for (class, center) in centers.iter().enumerate() {
        for _ in 0..per_class {
            features.push(vec![
                center[0] + rng.gen_range(-spread..spread),
                center[1] + rng.gen_range(-spread..spread),
            ]);
            labels.push(class);
        }
    }
    (features, labels)
}

fn bench_smo(c: &mut Criterion) {
    let (features, labels) = blobs(100, &[[0.0, 0.0], [1.5, 1.5]], 1.0, 11);
    let n = features.len();
    let y: Vec<f64> = labels.iter().map(|&l| if l == 0 { -1.0 } else { 1.0 }).collect();
    let kernel: Vec<f64> = (0..n * n)
        .map(|idx| rbf_kernel(&features[idx / n], &features[idx % n], 0.5))
        .collect();
    let params = SmoParams::new(10.0);
    c.bench_function("smo_200_overlapping", |b| {
        b.iter(|| smo_solve(n, |i, j| kernel[i * n + j], &y, &params).unwrap())
    });
}

fn bench_grid_search(c: &mut Criterion) {
    let (features, labels) = blobs(40, &[[0.0, 0.0], [2.0, 0.0], [1.0, 2.0]], 0.8, 11);
    c.bench_function("grid_search_120_3x2", |b| {
        b.iter(|| {
            grid_search(&features, &labels, &[0.5, 8.0, 128.0], &[0.125, 2.0], 3, 9).unwrap()
        })
    });
}

fn bench_multiclass(c: &mut Criterion) {
    let centers =
        [[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0], [1.0, 4.0], [4.0, 1.0]];
    let (features, labels) = blobs(30, &centers, 0.6, 11);
    let names: Vec<String> = (0..6).map(|i| format!("C{i}")).collect();
    c.bench_function("multiclass_180_6way", |b| {
        b.iter(|| svm_train_multiclass(&features, &labels, names.clone(), 10.0, 1.0).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default()
        .sample_size(10)
        .warm_up_time(Duration::from_millis(500))
        .measurement_time(Duration::from_secs(2));
    targets = bench_smo, bench_grid_search, bench_multiclass
}
criterion_main!(benches);
