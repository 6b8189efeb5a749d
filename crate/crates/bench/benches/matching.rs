use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use matchgame::choice::enumerate_path_independent;
use matchgame::da::{da_firm_proposing, da_worker_proposing, firm_proposing_unchecked, worker_proposing_unchecked};
use matchgame::games::{verify_theorem1, verify_theorem2};
use matchgame::{random_market, stable_set, Family, GameConfig, StableRule};

fn deferred_acceptance(c: &mut Criterion) {
    let mut group = c.benchmark_group("da");
    for nw in [4, 8, 12] {
        let mkt = random_market(1, nw, 6, Family::Responsive).unwrap();
        group.bench_with_input(BenchmarkId::new("worker", nw), &mkt, |b, m| {
            b.iter(|| da_worker_proposing(black_box(m)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("firm", nw), &mkt, |b, m| {
            b.iter(|| da_firm_proposing(black_box(m)).unwrap())
        });
        // Without the exhaustive admissibility check.
        group.bench_with_input(BenchmarkId::new("worker_unchecked", nw), &mkt, |b, m| {
            b.iter(|| worker_proposing_unchecked(black_box(m)))
        });
        group.bench_with_input(BenchmarkId::new("firm_unchecked", nw), &mkt, |b, m| {
            b.iter(|| firm_proposing_unchecked(black_box(m)))
        });
    }
    group.finish();
}

fn brute_force_stable_set(c: &mut Criterion) {
    let mkt = random_market(2, 4, 3, Family::Mixed).unwrap();
    c.bench_function("stable_set 4x3", |b| b.iter(|| stable_set(black_box(&mkt)).unwrap()));
}

fn enumeration(c: &mut Criterion) {
    c.bench_function("enumerate path-independent 4", |b| {
        b.iter(|| enumerate_path_independent(black_box(4)).unwrap())
    });
}

fn harnesses(c: &mut Criterion) {
    let config = GameConfig::default();
    let small = random_market(3, 2, 2, Family::Mixed).unwrap();
    c.bench_function("verify full game 2x2", |b| {
        b.iter(|| verify_theorem1(black_box(&small), StableRule::FirmOptimal, &config).unwrap())
    });
    let lad = random_market(4, 3, 3, Family::Responsive).unwrap();
    c.bench_function("verify workers game 3x3", |b| {
        b.iter(|| verify_theorem2(black_box(&lad), &config).unwrap())
    });
}

criterion_group!(
    benches,
    deferred_acceptance,
    brute_force_stable_set,
    enumeration,
    harnesses
);
criterion_main!(benches);
