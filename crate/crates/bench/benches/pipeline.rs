use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use lecq_bench::{running_example, scaled_instance};
use lecq_core::engine::{baselines, run_query, EngineOptions, BASELINES};
use lecq_core::lec::{build_feature_join_graph, feature_of, group_features, prune_features};
use lecq_core::local::find_local_partial_matches;

fn running(c: &mut Criterion) {
    let (d, q) = running_example();
    c.bench_function("running_example/full", |b| {
        b.iter(|| run_query(black_box(&d), black_box(&q), &EngineOptions::default()).unwrap())
    });
    c.bench_function("running_example/baselines", |b| {
        b.iter(|| baselines(black_box(&d), black_box(&q), &EngineOptions::default()).unwrap())
    });
}

fn configurations(c: &mut Criterion) {
    let mut group = c.benchmark_group("configurations");
    for vertices in [50, 200, 800] {
        let inst = scaled_instance(17, vertices);
        for base in BASELINES {
            let opts = EngineOptions {
                candidates: base.candidates,
                prune: base.prune,
                lec_assembly: base.lec_assembly,
                ..Default::default()
            };
            group.bench_with_input(BenchmarkId::new(base.name, vertices), &inst, |b, inst| {
                b.iter(|| run_query(&inst.distributed, &inst.query, &opts).unwrap())
            });
        }
    }
    group.finish();
}

fn pruning(c: &mut Criterion) {
    let inst = scaled_instance(29, 400);
    let features: Vec<_> = inst
        .distributed
        .fragments()
        .iter()
        .flat_map(|f| find_local_partial_matches(f, &inst.query, None))
        .map(|l| feature_of(&l, &inst.query))
        .collect();
    c.bench_function("prune_features/400", |b| {
        b.iter(|| prune_features(&build_feature_join_graph(group_features(black_box(&features)))))
    });
}

criterion_group!(benches, running, configurations, pruning);
criterion_main!(benches);
