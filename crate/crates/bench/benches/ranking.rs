use chrono::NaiveDate;
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use entrank::synth::{self, SynthConfig};
use entrank::{build_index, oracle_rank, rank, Granularity, Query, Semantics};

fn config(documents: usize, entities: usize) -> SynthConfig {
    SynthConfig {
        documents,
        entities,
        first_date: NaiveDate::from_ymd_opt(1990, 1, 1).unwrap(),
        last_date: NaiveDate::from_ymd_opt(1999, 12, 31).unwrap(),
        ..SynthConfig::default()
    }
}

fn query(semantics: Semantics) -> Query {
    Query::new(
        [synth::entity(0), synth::entity(3)],
        semantics,
        NaiveDate::from_ymd_opt(1990, 1, 1).unwrap(),
        NaiveDate::from_ymd_opt(1999, 12, 31).unwrap(),
        Granularity::Month,
    )
    .unwrap()
}

fn index(c: &mut Criterion) {
    let mut group = c.benchmark_group("build_index");
    group.sample_size(10);
    for docs in [10_000, 100_000] {
        let corpus = synth::synth_corpus(&config(docs, docs / 20), 7);
        group.bench_with_input(BenchmarkId::from_parameter(docs), &corpus, |b, corpus| {
            b.iter(|| build_index(corpus, Granularity::Month))
        });
    }
    group.finish();
}

fn ranking(c: &mut Criterion) {
    let mut group = c.benchmark_group("rank");
    group.sample_size(10);
    let corpus = synth::synth_corpus(&config(100_000, 5_000), 7);
    let idx = build_index(&corpus, Granularity::Month);
    for semantics in [Semantics::All, Semantics::Any] {
        let q = query(semantics);
        group.bench_function(semantics.as_str(), |b| b.iter(|| rank(&idx, &q).unwrap()));
    }
    group.finish();
}

// the reference scorer is quadratic; keep it small
fn oracle(c: &mut Criterion) {
    let corpus = synth::synth_corpus(&config(2_000, 200), 7);
    let idx = build_index(&corpus, Granularity::Month);
    let q = query(Semantics::Any);
    let mut group = c.benchmark_group("rank_vs_oracle_2k");
    group.sample_size(10);
    group.bench_function("indexed", |b| b.iter(|| rank(&idx, &q).unwrap()));
    group.bench_function("oracle", |b| b.iter(|| oracle_rank(&corpus, &q)));
    group.finish();
}

criterion_group!(benches, index, ranking, oracle);
criterion_main!(benches);
