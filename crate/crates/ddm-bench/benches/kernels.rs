//! Criterion benchmarks for the numeric kernels and the denoiser forward
//! pass, the hot paths of training and extraction.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ddm_bench::{random_adjacency, random_matrix};
use ddm_core::denoiser::{denoiser_forward, init_params, DenoiserConfig};
use ddm_core::diffusion::{compute_batch_stats, diffuse_to_step, NoiseMode, NoiseSchedule};
use ddm_core::numeric::{normalize_adjacency, RngStream};
use std::hint::black_box;
use std::rc::Rc;

fn bench_matmul(c: &mut Criterion) {
    let mut group = c.benchmark_group("matmul");
    for n in [32, 128] {
        let a = random_matrix(n, n, 1);
        let b = random_matrix(n, n, 2);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| black_box(a.matmul(&b).unwrap()));
        });
    }
    group.finish();
}

fn bench_spmm(c: &mut Criterion) {
    let mut group = c.benchmark_group("spmm");
    for n in [100, 1000] {
        let adj = random_adjacency(n, 6, 3);
        let x = random_matrix(n, 64, 4);
        group.bench_with_input(BenchmarkId::from_parameter(n), &n, |bench, _| {
            bench.iter(|| black_box(adj.spmm(&x).unwrap()));
        });
    }
    group.finish();
}

fn bench_diffuse(c: &mut Criterion) {
    let mut group = c.benchmark_group("diffuse_to_step");
    let sched = NoiseSchedule::linear(1000, 1e-4, 0.02).unwrap();
    let x0 = random_matrix(500, 32, 5);
    let stats = compute_batch_stats(&x0).unwrap();
    for mode in NoiseMode::ALL {
        group.bench_with_input(BenchmarkId::from_parameter(mode.tag()), &mode, |bench, &mode| {
            let mut rng = RngStream::new(6);
            bench.iter(|| {
                black_box(diffuse_to_step(&x0, 500, &sched, mode, &stats, &mut rng).unwrap())
            });
        });
    }
    group.finish();
}

fn bench_denoiser_forward(c: &mut Criterion) {
    let mut group = c.benchmark_group("denoiser_forward");
    for nodes in [50, 500] {
        let cfg = DenoiserConfig::with_input_dim(16);
        let mut rng = RngStream::new(7);
        let params = init_params(&cfg, &mut rng).unwrap();
        let adj = Rc::new(normalize_adjacency(&random_adjacency(nodes, 6, 8)).unwrap());
        let x_t = random_matrix(nodes, 16, 9);
        group.bench_with_input(BenchmarkId::from_parameter(nodes), &nodes, |bench, _| {
            bench.iter(|| black_box(denoiser_forward(&params, &cfg, &x_t, &adj, 100).unwrap()));
        });
    }
    group.finish();
}

criterion_group!(
    benches,
    bench_matmul,
    bench_spmm,
    bench_diffuse,
    bench_denoiser_forward
);
criterion_main!(benches);
