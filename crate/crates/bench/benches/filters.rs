use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use propfix_bench::{
    fast_consistencies, slow_consistencies, small_fixture, sparse_fixture, transition_fixtures,
};
use propfix_core::{enforce, generate_model_b, DomainState, GenSpec};

fn fast_filters(c: &mut Criterion) {
    let mut group = c.benchmark_group("fast");
    for fixture in transition_fixtures() {
        for lc in fast_consistencies() {
            group.bench_with_input(BenchmarkId::new(lc.to_string(), fixture.name), &fixture.net, |b, net| {
                b.iter(|| enforce(net, &mut DomainState::full(net), lc, None))
            });
        }
    }
    group.finish();
}

fn slow_filters(c: &mut Criterion) {
    let fixture = small_fixture();
    let mut group = c.benchmark_group("slow");
    group.sample_size(10);
    for lc in slow_consistencies() {
        group.bench_with_input(BenchmarkId::new(lc.to_string(), fixture.name), &fixture.net, |b, net| {
            b.iter(|| enforce(net, &mut DomainState::full(net), lc, None))
        });
    }
    group.finish();
}

fn sparse_ac(c: &mut Criterion) {
    let fixture = sparse_fixture();
    c.bench_function("ac/200x30-sparse", |b| {
        b.iter(|| enforce(&fixture.net, &mut DomainState::full(&fixture.net), propfix_core::ConsistencyId::Ac, None))
    });
}

fn generator(c: &mut Criterion) {
    let spec = GenSpec { n: 200, d: 30, p1: 0.15, p2: 0.5, seed: 9 };
    c.bench_function("generate/200x30-dense", |b| b.iter(|| generate_model_b(&spec)));
}

criterion_group!(benches, fast_filters, slow_filters, sparse_ac, generator);
criterion_main!(benches);
