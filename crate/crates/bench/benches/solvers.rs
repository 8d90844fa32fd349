use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use wqed_core::ed::{lowest_states, EdConfig, Sector};
use wqed_core::excitation::{find_bound_state_1q, find_bound_states_2q};
use wqed_core::{solve_1q, solve_2q, ModelParams};

fn polaron(c: &mut Criterion) {
    let m = ModelParams::single(0.3, 1.0, 0.2, 0.3, 2000).unwrap();
    c.bench_function("solve_1q n2000", |b| b.iter(|| solve_1q(black_box(&m)).unwrap()));

    let sol = solve_1q(&m).unwrap();
    c.bench_function("bound_state_1q n2000", |b| {
        b.iter(|| find_bound_state_1q(black_box(&sol), &m).unwrap())
    });

    let p = ModelParams::pair(0.3, 1.0, 0.2, 0.3, 5, 400).unwrap();
    c.bench_function("solve_2q n400", |b| b.iter(|| solve_2q(black_box(&p)).unwrap()));

    let sol2 = solve_2q(&p).unwrap();
    c.bench_function("bound_states_2q n400", |b| {
        b.iter(|| find_bound_states_2q(black_box(&sol2), &p).unwrap())
    });
}

fn ed(c: &mut Criterion) {
    let m = ModelParams::single(0.3, 1.0, 0.2, 0.2, 8).unwrap();
    let cfg = EdConfig {
        n_max: 2,
        total_max: 3,
        ..Default::default()
    };
    let mut group = c.benchmark_group("ed");
    group.sample_size(10);
    group.bench_function("lowest_states n8", |b| {
        b.iter(|| lowest_states(black_box(&m), &cfg, Sector::Even, 1).unwrap())
    });
    group.finish();
}

criterion_group!(benches, polaron, ed);
criterion_main!(benches);
