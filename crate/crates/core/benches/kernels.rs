//! Hot kernels, timed under whichever build is active.
//!
//! Compare the rayon and sequential builds with a saved baseline:
//!
//! ```text
//! cargo bench -p spataudio --no-default-features -- --save-baseline seq
//! cargo bench -p spataudio -- --baseline seq
//! ```

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use spataudio::audio::{resample, AudioBuffer};
use spataudio::dsp::{envelope, fft_convolve, stft, StftParams};
use spataudio::hrtf::{nearest_hrir, render_source_hrtf, HrirDataset, HrirEntry};
use spataudio::scene::{SpatialSample, Trajectory};
use spataudio::spatial3d::render_source_3d;
use spataudio::RenderConfig;

fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.random_range(-0.5..0.5)).collect()
}

fn grid_dataset(ir_len: usize) -> HrirDataset {
    let mut entries = Vec::new();
    let mut seed = 0;
    for el in (-40..=90).step_by(10) {
        for az in (-180..180).step_by(5) {
            seed += 1;
            entries.push(HrirEntry {
                azimuth: az as f64,
                elevation: el as f64,
                left: noise(ir_len, seed),
                right: noise(ir_len, seed + 100_000),
            });
        }
    }
    HrirDataset::new(16000, entries).unwrap()
}

fn sweep() -> Trajectory {
    Trajectory::new(vec![
        SpatialSample::new(0.0, -0.9, -0.3, 0.5),
        SpatialSample::new(10.0, 0.9, 0.3, 4.0),
    ])
    .unwrap()
}

fn bench_stft(c: &mut Criterion) {
    let mut g = c.benchmark_group("stft");
    for secs in [1usize, 10] {
        let x = noise(16000 * secs, 1);
        g.throughput(Throughput::Elements(x.len() as u64));
        g.bench_with_input(BenchmarkId::from_parameter(secs), &x, |b, x| {
            b.iter(|| stft(black_box(x), &StftParams::default(), 16000).unwrap())
        });
    }
    g.finish();
}

fn bench_convolve(c: &mut Criterion) {
    let x = noise(160_000, 2);
    let ir = noise(512, 3);
    c.bench_function("fft_convolve/10s_x_512", |b| {
        b.iter(|| fft_convolve(black_box(&x), black_box(&ir)))
    });
    c.bench_function("envelope/10s", |b| b.iter(|| envelope(black_box(&x))));
}

fn bench_resample(c: &mut Criterion) {
    let mut g = c.benchmark_group("resample");
    let x = AudioBuffer::stereo(48000, noise(48000 * 5, 4), noise(48000 * 5, 5)).unwrap();
    g.bench_function("48k_to_16k/5s", |b| {
        b.iter(|| resample(black_box(&x), 16000).unwrap())
    });
    let x = AudioBuffer::mono(44100, noise(44100 * 5, 6)).unwrap();
    g.bench_function("44k1_to_16k/5s", |b| {
        b.iter(|| resample(black_box(&x), 16000).unwrap())
    });
    g.finish();
}

fn bench_render(c: &mut Criterion) {
    let mut g = c.benchmark_group("render");
    g.sample_size(20);
    let mono = AudioBuffer::mono(16000, noise(160_000, 7)).unwrap();
    let traj = sweep();
    let cfg = RenderConfig::default();
    g.bench_function("algo3d/10s", |b| {
        b.iter(|| render_source_3d(black_box(&mono), &traj, &cfg).unwrap())
    });
    let ds = grid_dataset(256);
    g.bench_function("hrtf/10s", |b| {
        b.iter(|| render_source_hrtf(black_box(&mono), &traj, &ds, &cfg).unwrap())
    });
    g.finish();
}

fn bench_nearest(c: &mut Criterion) {
    let ds = grid_dataset(8);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let queries: Vec<(f64, f64)> = (0..1000)
        .map(|_| {
            (
                rng.random_range(-180.0..180.0),
                rng.random_range(-90.0..90.0),
            )
        })
        .collect();
    c.bench_function("nearest_hrir/1000_queries", |b| {
        b.iter(|| {
            queries
                .iter()
                .map(|&(az, el)| nearest_hrir(&ds, az, el).azimuth)
                .sum::<f64>()
        })
    });
}

criterion_group!(
    benches,
    bench_stft,
    bench_convolve,
    bench_resample,
    bench_render,
    bench_nearest
);
criterion_main!(benches);
