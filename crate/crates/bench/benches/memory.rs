use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use gbnn::{
    retrieve, score, ActivationRule, Criterion as Stop, DynamicRule, GlskoParams, GwstaParams,
    RetrievalConfig,
};
use gbnn_bench::fixture;

fn bench_store(c: &mut Criterion) {
    let mut group = c.benchmark_group("store");
    for &count in &[1_000usize, 10_000] {
        group.bench_with_input(BenchmarkId::from_parameter(count), &count, |b, &count| {
            b.iter(|| black_box(fixture(100, 64, 12, count, 3, 0, 1).network.edge_count()));
        });
    }
    group.finish();
}

fn bench_scoring(c: &mut Criterion) {
    let mut group = c.benchmark_group("score-all-fanals");
    let fx = fixture(100, 64, 12, 100_000, 3, 1, 2);
    let mut net = fx.network;
    net.insert_probe(&fx.probes[0].1).unwrap();
    for (name, rule) in [
        ("sos", DynamicRule::SumOfSum),
        ("norm", DynamicRule::Normalization),
        ("som", DynamicRule::SumOfMax),
    ] {
        group.bench_function(name, |b| b.iter(|| black_box(score(&net, rule, 1.0))));
    }
    group.finish();
}

fn bench_retrieval(c: &mut Criterion) {
    let mut group = c.benchmark_group("retrieve");
    group.sample_size(20);
    let fx = fixture(100, 64, 12, 100_000, 3, 64, 3);
    let gwsta = RetrievalConfig {
        dynamic: DynamicRule::SumOfMax,
        activation: ActivationRule::Gwsta(GwstaParams::new(12)),
        criteria: vec![Stop::Conv, Stop::Iter(30)],
        gamma: 1.0,
        seed: 5,
        strict_clique: false,
    };
    let glsko = RetrievalConfig {
        activation: ActivationRule::Glsko(GlskoParams::new(1, Some(1))),
        criteria: vec![Stop::Eqsc],
        ..gwsta.clone()
    };
    for (name, config) in [("gwsta12", &gwsta), ("glsko-b1-m1", &glsko)] {
        group.bench_function(name, |b| {
            let mut net = fx.network.clone();
            b.iter(|| {
                for (_, probe) in &fx.probes {
                    black_box(retrieve(&mut net, probe, config).unwrap());
                }
            });
        });
    }
    group.finish();
}

fn bench_oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("oracle-scan");
    group.sample_size(20);
    let fx = fixture(100, 64, 12, 100_000, 3, 64, 4);
    group.bench_function("100k-messages", |b| {
        b.iter(|| {
            for (_, probe) in &fx.probes {
                black_box(fx.store.retrieve(probe));
            }
        });
    });
    group.finish();
}

criterion_group!(benches, bench_store, bench_scoring, bench_retrieval, bench_oracle);
criterion_main!(benches);
