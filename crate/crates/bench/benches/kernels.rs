use criterion::{criterion_group, criterion_main, Criterion};
use parametric_bench::{enveloped, resonant};
use parametric_core::magnus::{magnus_a1, magnus_a2, magnus_a3};
use parametric_core::propagator::{interaction_propagator, DEFAULT_ORACLE_TOL};
use parametric_core::{ctp, perturbation};
use std::hint::black_box;

fn fourier(c: &mut Criterion) {
    let p = enveloped();
    c.bench_function("fourier_eta at 2 omega0", |b| b.iter(|| p.fourier_eta(black_box(2.0)).unwrap()));
}

fn oracle(c: &mut Criterion) {
    let p = resonant();
    c.bench_function("oracle propagator", |b| {
        b.iter(|| interaction_propagator(black_box(&p), DEFAULT_ORACLE_TOL).unwrap())
    });
}

fn magnus(c: &mut Criterion) {
    let p = enveloped();
    let mut g = c.benchmark_group("magnus");
    g.sample_size(10);
    g.bench_function("A1", |b| b.iter(|| magnus_a1(black_box(&p)).unwrap()));
    g.bench_function("A2", |b| b.iter(|| magnus_a2(black_box(&p)).unwrap()));
    g.bench_function("A3", |b| b.iter(|| magnus_a3(black_box(&p)).unwrap()));
    g.finish();
}

fn actions(c: &mut Criterion) {
    let p = enveloped();
    let q = p.scaled(0.5).unwrap();
    c.bench_function("gamma2", |b| b.iter(|| perturbation::gamma2(black_box(&p)).unwrap()));
    c.bench_function("ctp action", |b| b.iter(|| ctp::ctp_action(black_box(&p), black_box(&q)).unwrap()));
    c.bench_function("eom source", |b| b.iter(|| ctp::eom_source(black_box(&p), black_box(3.0)).unwrap()));
}

criterion_group!(benches, fourier, oracle, magnus, actions);
criterion_main!(benches);
