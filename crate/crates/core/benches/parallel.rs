//! Parallel vs sequential throughput of the hot paths.
//!
//! With the default `parallel` feature each workload runs once in a
//! single-thread rayon pool and once in the global pool. Build with
//! `--no-default-features` to time the plain-iterator fallback.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use mriq_core::distortion::{self, BlurMode};
use mriq_core::metrics;
use mriq_core::pipeline::{self, SampleOptions};
use mriq_core::spectral;
use mriq_core::volume::Volume;

fn phantom(n: usize) -> Volume {
    let c = (n as f64 - 1.0) / 2.0;
    Volume::from_fn([n; 3], [1.0; 3], move |x, y, z| {
        let r2 = (x as f64 - c).powi(2) + (y as f64 - c).powi(2) + (z as f64 - c).powi(2);
        let r = r2.sqrt() / (0.4 * n as f64);
        if r >= 1.0 {
            0.0
        } else {
            (1.0 - r * r) * (0.7 + 0.2 * (0.5 * x as f64).sin())
        }
    })
    .unwrap()
}

#[cfg(feature = "parallel")]
fn modes() -> Vec<(String, rayon::ThreadPool)> {
    let all = rayon::current_num_threads();
    let mut out = vec![(
        "single_thread".to_string(),
        rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap(),
    )];
    out.push((
        format!("pool_{all}_threads"),
        rayon::ThreadPoolBuilder::new()
            .num_threads(all)
            .build()
            .unwrap(),
    ));
    out
}

fn run_modes(c: &mut Criterion, group: &str, mut work: impl FnMut() + Send) {
    let mut g = c.benchmark_group(group);
    g.sample_size(10);
    #[cfg(feature = "parallel")]
    for (label, pool) in modes() {
        g.bench_function(BenchmarkId::from_parameter(label), |b| {
            b.iter(|| pool.install(&mut work))
        });
    }
    #[cfg(not(feature = "parallel"))]
    g.bench_function(BenchmarkId::from_parameter("sequential"), |b| {
        b.iter(&mut work)
    });
    g.finish();
}

fn benches(c: &mut Criterion) {
    let v64 = phantom(64);
    run_modes(c, "fft3_centered_64", || {
        std::hint::black_box(spectral::fft3_centered(&v64));
    });
    run_modes(c, "gaussian_blur_64_k11", || {
        let mode = BlurMode::Gaussian {
            kernel: 11,
            sigma: 2.0,
        };
        std::hint::black_box(distortion::apply_blur(&v64, mode).unwrap());
    });
    let v48 = phantom(48);
    run_modes(c, "ssim3d_48", || {
        std::hint::black_box(metrics::ssim3d(&v48, &v48).unwrap());
    });
    let v32 = phantom(32);
    let opts = SampleOptions::new(32, 0.5);
    let mut seed = 0u64;
    run_modes(c, "generate_sample_32", || {
        seed += 1;
        std::hint::black_box(pipeline::generate_sample(&v32, seed, &opts).unwrap());
    });
}

criterion_group!(parallel, benches);
criterion_main!(parallel);
