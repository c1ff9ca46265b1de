//! End-to-end benchmarks of the solver pipeline: plain radial
//! integration, the log-plane continuation, tail classification, and a
//! small parallel amplitude sweep.

use std::hint::black_box;
use std::time::Duration;

use criterion::{criterion_group, criterion_main, Criterion};
use selfsim_bench::{controls_to, fast_diffusion_params, slow_tail_params};
use selfsim_core::{
    classify_decay, integrate_profile, solve_profile, sweep_grid, sweep_initial_values,
};

fn bench_integrate_radial(c: &mut Criterion) {
    let params = slow_tail_params();
    let controls = controls_to(100.0);
    c.bench_function("integrate/radial_to_r100", |b| {
        b.iter(|| integrate_profile(black_box(1.0), &params, &controls).expect("integrates"));
    });
}

fn bench_log_plane_continuation(c: &mut Criterion) {
    let params = fast_diffusion_params();
    let controls = controls_to(1e3);
    c.bench_function("integrate/log_plane_to_r1e3", |b| {
        b.iter(|| solve_profile(black_box(0.8), &params, &controls).expect("solves"));
    });
}

fn bench_classify(c: &mut Criterion) {
    let params = slow_tail_params();
    let controls = controls_to(1e3);
    c.bench_function("classify/slow_tail", |b| {
        b.iter(|| classify_decay(black_box(1.0), &params, &controls).expect("classifies"));
    });
}

fn bench_sweep(c: &mut Criterion) {
    let params = slow_tail_params();
    let controls = controls_to(200.0);
    let grid = sweep_grid(0.5, 2.0, 4, false);
    c.bench_function("sweep/4_amplitudes_to_r200", |b| {
        b.iter(|| sweep_initial_values(&params, black_box(&grid), &controls));
    });
}

criterion_group! {
    name = pipeline;
    config = Criterion::default()
        .sample_size(10)
        .warm_up_time(Duration::from_millis(300))
        .measurement_time(Duration::from_secs(2));
    targets =
        bench_integrate_radial,
        bench_log_plane_continuation,
        bench_classify,
        bench_sweep
}
criterion_main!(pipeline);
