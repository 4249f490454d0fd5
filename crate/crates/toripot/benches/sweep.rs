//! Compares the parallel and sequential drivers for sweeping a family of
//! models over a parameter range. The sweep is data-parallel over fiber
//! samples; with the `parallel` feature the samples run on the rayon pool
//! and without it they run in order on one thread. The two groups bracket
//! the per-sample cost: refining the continuum is light, so the pool mostly
//! measures its own overhead, while the bulk deformation is heavy enough
//! for the parallel driver to win on multicore hardware. Run with and
//! without default features to see both code paths:
//!
//!   cargo bench -p toripot
//!   cargo bench -p toripot --no-default-features

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use std::collections::BTreeMap;

use toripot::novikov::ScalarMode;
use toripot::potential::ToricModel;
use toripot::rat::{rat, rati};
use toripot::solver::{sweep_family, RhoSpec};

const DRIVER: &str = if cfg!(feature = "parallel") { "parallel" } else { "sequential" };

fn degenerate_model() -> ToricModel {
    ToricModel::registry("F2hat", &BTreeMap::new()).expect("built-in model")
}

/// Start and end of the monotone line segment the sweeps sample.
fn endpoints() -> (Vec<toripot::Rat>, Vec<toripot::Rat>) {
    (vec![rat(9, 20), rat(11, 20)], vec![rat(1, 4), rat(3, 4)])
}

/// Sweeps the degenerate model along its monotone line: every sample
/// detects and refines the one-parameter family of critical points.
fn bench_family_sweep(c: &mut Criterion) {
    let model = degenerate_model();
    let (start, end) = endpoints();
    let e = rati(2);
    let mut group = c.benchmark_group("sweep/family");
    group.sample_size(10);
    for steps in [4usize, 16] {
        group.bench_with_input(BenchmarkId::new(DRIVER, steps), &steps, |b, &steps| {
            b.iter(|| {
                sweep_family(&model, &start, &end, steps, &e, ScalarMode::Exact, None)
                    .expect("the sweep succeeds")
            })
        });
    }
    group.finish();
}

/// Same line with the bulk deformation switched on: every sample splits the
/// continuum and Newton-lifts the two surviving points, the dominant cost.
fn bench_bulk_sweep(c: &mut Criterion) {
    let model = degenerate_model();
    let (start, end) = endpoints();
    let e = rati(2);
    let mut group = c.benchmark_group("sweep/bulk");
    group.sample_size(10);
    for steps in [4usize, 16] {
        group.bench_with_input(BenchmarkId::new(DRIVER, steps), &steps, |b, &steps| {
            b.iter(|| {
                sweep_family(
                    &model,
                    &start,
                    &end,
                    steps,
                    &e,
                    ScalarMode::Exact,
                    Some(("S2van", &RhoSpec::Auto)),
                )
                .expect("the sweep succeeds")
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_family_sweep, bench_bulk_sweep);
criterion_main!(benches);
