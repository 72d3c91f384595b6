use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};
use removable_core::detour::{detour_batch, sample_lines};
use removable_core::fractal::{apollonian_depth, gasket_levels, TangentCircleTriple};
use removable_core::qhyp::{qh_distance, QhGraph};
use removable_core::whitney::{refine_for_qh, whitney_decompose, ShapeDomain};
use removable_core::Point;

fn fractals(c: &mut Criterion) {
    c.bench_function("gasket_levels(8)", |b| {
        b.iter(|| gasket_levels(black_box(8)).unwrap())
    });
    c.bench_function("apollonian_depth(5)", |b| {
        b.iter(|| apollonian_depth(&TangentCircleTriple::unit(), black_box(5)).unwrap())
    });
}

fn whitney(c: &mut Criterion) {
    let disk = Arc::new(ShapeDomain::unit_disk());
    c.bench_function("whitney disk cutoff 10", |b| {
        b.iter(|| whitney_decompose(disk.clone(), black_box(10)).unwrap())
    });
    let w = whitney_decompose(disk, 9).unwrap();
    c.bench_function("refine_for_qh disk cutoff 9", |b| {
        b.iter(|| refine_for_qh(black_box(&w)).unwrap())
    });
}

fn distances(c: &mut Criterion) {
    let g = QhGraph::new(
        refine_for_qh(&whitney_decompose(Arc::new(ShapeDomain::unit_disk()), 9).unwrap()).unwrap(),
    );
    let (a, z) = (Point::new(0.0, 0.0), Point::new(0.9, 0.1));
    c.bench_function("qh_distance disk cutoff 9", |b| {
        b.iter(|| qh_distance(&g, black_box(a), black_box(z)).unwrap())
    });
}

fn detours(c: &mut Criterion) {
    let g = gasket_levels(8).unwrap();
    let lines = sample_lines(&g, 100, 7);
    c.bench_function("detour 100 lines eps 0.05", |b| {
        b.iter(|| detour_batch(&g, black_box(&lines), 0.05).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(10);
    targets = fractals, whitney, distances, detours
}
criterion_main!(benches);
