use std::hint::black_box;

use canontime::timekernel::FilonPlan;
use canontime::{build_pom, mf_matrix, time_density, FilonRule, PomOptions, TimeGrid};
use canontime_bench::{bump_state, incommensurate_spectrum, uniform_box};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn filon_transform(c: &mut Criterion) {
    let mut group = c.benchmark_group("filon transform");
    for nodes in [257, 2049] {
        let st = bump_state(nodes);
        let plan = FilonPlan::new(st.spectrum().energies(), vec![st.block(0).to_vec()]);
        let rule = FilonRule::default();
        group.bench_with_input(BenchmarkId::from_parameter(nodes), &plan, |b, plan| {
            b.iter(|| plan.transform(black_box(3.7), &rule).unwrap())
        });
    }
    group.finish();
}

fn density(c: &mut Criterion) {
    let st = bump_state(401);
    let grid = TimeGrid::symmetric(400.0, 4001).unwrap();
    c.bench_function("time density 401 x 4001", |b| b.iter(|| time_density(black_box(&st), &grid).unwrap()));
}

fn matrix_route(c: &mut Criterion) {
    let mut group = c.benchmark_group("mf matrix");
    group.sample_size(10);
    for nodes in [128, 256] {
        let st = uniform_box(nodes);
        group.bench_with_input(BenchmarkId::from_parameter(nodes), &st, |b, st| {
            b.iter(|| mf_matrix(st.spectrum_arc().clone()).unwrap().expectation(st).unwrap())
        });
    }
    group.finish();
}

fn pom(c: &mut Criterion) {
    let mut group = c.benchmark_group("build pom");
    group.sample_size(10);
    let options = PomOptions { completeness_tol: None, ..PomOptions::default() };
    // closely packed levels need a long window to keep N_τ well conditioned
    for (levels, tau) in [(3, 5.0), (16, 200.0)] {
        let s = incommensurate_spectrum(levels);
        group.bench_with_input(BenchmarkId::new("levels", levels), &s, |b, s| {
            b.iter(|| build_pom(s.clone(), tau, 1024, &options).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, filon_transform, density, matrix_route, pom);
criterion_main!(benches);
