use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, Criterion};

use crlab_core::gallery::{builtin, run_gallery, unit_box, CheckId, RunSettings};
use crlab_core::geometry::CoefficientExpr;
use crlab_core::operator::{assemble_local_operator, orthonormalize_frame};
use crlab_core::pseudoconcave::{certify_metric, certify_region, LatticeGrid};
use crlab_core::sussmann::explore_leaf;

fn jets(c: &mut Criterion) {
    let m = builtin("quadric11").unwrap();
    let p = [0.1, -0.2, 0.05, 0.3, -0.1];
    c.bench_function("frame_jets_quadric11", |b| b.iter(|| m.frame.jets(black_box(&p)).unwrap()));
}

fn certify(c: &mut Criterion) {
    let m = builtin("quadric11").unwrap();
    let origin = [0.0; 5];
    c.bench_function("certify_metric_quadric11", |b| {
        b.iter(|| certify_metric(&m.frame, black_box(&origin)).unwrap())
    });
    let grid = LatticeGrid::new(unit_box(&m), 3);
    c.bench_function("certify_region_quadric11_243", |b| b.iter(|| certify_region(&m.frame, &grid)));
}

fn leaves(c: &mut Criterion) {
    let m = builtin("heisenberg").unwrap();
    let fields = m.frame.fields();
    let origin = [0.0; 3];
    let region = unit_box(&m);
    c.bench_function("explore_leaf_heisenberg", |b| {
        b.iter(|| explore_leaf(&fields, &origin, &region, 0.05, 50_000).unwrap())
    });
}

fn operator(c: &mut Criterion) {
    let m = builtin("quadric11").unwrap();
    let region = unit_box(&m);
    let report = certify_region(&m.frame, &LatticeGrid::new(region.clone(), 3));
    let oframe = Arc::new(orthonormalize_frame(Arc::clone(&m.frame), &report).unwrap());
    let op = assemble_local_operator(oframe, region).unwrap();
    let u = CoefficientExpr::parse("y1*y3 - y2*y4 + y5^2", 5).unwrap();
    let p = [0.1, -0.2, 0.05, 0.3, -0.1];
    c.bench_function("apply_operator_quadric11", |b| b.iter(|| op.apply(&u, black_box(&p)).unwrap()));
}

fn gallery(c: &mut Criterion) {
    let m = builtin("leviflat").unwrap();
    let mut group = c.benchmark_group("gallery");
    group.sample_size(10);
    group.bench_function("run_gallery_leviflat_all", |b| {
        b.iter(|| run_gallery(&m, &CheckId::ALL, RunSettings::default()))
    });
    group.finish();
}

criterion_group!(benches, jets, certify, leaves, operator, gallery);
criterion_main!(benches);
