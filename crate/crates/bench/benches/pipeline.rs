use std::f64::consts::PI;

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use topoband::learn::{cross_validate, FeatureMatrix, ModelSpec, RfParams};
use topoband::persistence::vr_persistence;
use topoband::signal::{notch_cascade, MultichannelRecording, NotchParams};
use topoband::takens::PointCloud;

/// 240 points in 60 dimensions: a noisy loop, the shape of one embedded epoch.
fn epoch_cloud(seed: u64) -> PointCloud {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let mix: Vec<[f64; 2]> = (0..60)
        .map(|_| [normal() / 60f64.sqrt(), normal() / 60f64.sqrt()])
        .collect();
    let mut pts = Vec::with_capacity(240 * 60);
    for i in 0..240 {
        let ph = 2.0 * PI * 233.0 * (i * 10) as f64 / 1200.0;
        for m in &mix {
            pts.push(10.0 * (m[0] * ph.cos() + m[1] * ph.sin()) + normal());
        }
    }
    PointCloud::new(pts, 60, 0).unwrap()
}

fn persistence(c: &mut Criterion) {
    let cloud = epoch_cloud(1);
    c.bench_function("vr_persistence 240x60", |b| {
        b.iter(|| vr_persistence(black_box(&cloud), 1).unwrap())
    });
}

fn filtering(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let channels: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..12_000).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let rec = MultichannelRecording::with_default_names(channels, 1200.0).unwrap();
    c.bench_function("notch cascade 4ch x 10s", |b| {
        b.iter(|| notch_cascade(black_box(&rec), &NotchParams::default()).unwrap())
    });
}

fn forest(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rows: Vec<Vec<f64>> = (0..180)
        .map(|_| (0..198).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect();
    let y: Vec<usize> = (0..180).map(|i| if i < 90 { 0 } else { 1 + i % 3 }).collect();
    let data = FeatureMatrix::from_rows(rows, y).unwrap();
    let spec = ModelSpec::RandomForest(RfParams::default());
    let mut g = c.benchmark_group("learn");
    g.sample_size(10);
    g.bench_function("random forest 5-fold CV 180x198", |b| {
        b.iter(|| cross_validate(&spec, black_box(&data), 5, 0).unwrap())
    });
    g.finish();
}

criterion_group!(benches, persistence, filtering, forest);
criterion_main!(benches);
