use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use hsflow_bench::{smooth, state};
use hsflow_core::diagnostics::heat_kernel;
use hsflow_core::flows::step;
use hsflow_core::g2::phi0;
use hsflow_core::selftest::standard_selftest;
use hsflow_core::{AltForm, GridSpec, SkewMatrix, StepperConfig, StructureKind};

fn algebra(c: &mut Criterion) {
    let phi = phi0();
    let psi = phi.hodge();
    let beta = SkewMatrix::from_form(&phi.interior(&[0.3, -0.1, 0.7, 0.2, 0.0, -0.5, 0.4]).unwrap()).unwrap();
    let eta = AltForm::from_coeffs(7, 2, (0..21).map(|i| (i as f64).sin()).collect()).unwrap();
    c.bench_function("hodge_3form", |b| b.iter(|| black_box(&phi).hodge()));
    c.bench_function("wedge_3_2", |b| b.iter(|| black_box(&phi).wedge(black_box(&eta)).unwrap()));
    c.bench_function("so_action_3form", |b| b.iter(|| black_box(&phi).so_action(black_box(&beta)).unwrap()));
    c.bench_function("interior_4form", |b| {
        b.iter(|| black_box(&psi).interior(&[1.0, 0.5, 0.0, -1.0, 0.2, 0.0, 0.3]).unwrap())
    });
    let mut g = c.benchmark_group("selftest");
    g.sample_size(10);
    g.bench_function("standard", |b| b.iter(standard_selftest));
    g.finish();
}

fn tensions(c: &mut Criterion) {
    let mut g = c.benchmark_group("tension");
    g.sample_size(10);
    for (kind, n) in
        [(StructureKind::Parallelism, 16), (StructureKind::Acs, 8), (StructureKind::Acts, 12), (StructureKind::G2, 12)]
    {
        let s = smooth(kind, n);
        g.bench_with_input(BenchmarkId::new(kind.name(), n), &s, |b, s| b.iter(|| s.tension()));
    }
    g.finish();
}

fn stepping(c: &mut Criterion) {
    let mut g = c.benchmark_group("rk4_step");
    g.sample_size(10);
    let cfg = StepperConfig::default();
    for (kind, n) in [(StructureKind::Parallelism, 16), (StructureKind::G2, 8)] {
        let st = state(kind, n);
        g.bench_with_input(BenchmarkId::new(kind.name(), n), &st, |b, st| b.iter(|| step(st, &cfg).unwrap()));
    }
    g.finish();
}

fn entropy(c: &mut Criterion) {
    let grid = GridSpec::torus(3, 3, 32, 1.0).unwrap();
    c.bench_function("heat_kernel_32cubed", |b| b.iter(|| heat_kernel(&grid, &[0.5, 0.5, 0.5], black_box(0.05))));
}

criterion_group!(benches, algebra, tensions, stepping, entropy);
criterion_main!(benches);
