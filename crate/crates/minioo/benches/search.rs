//! Parallel vs. sequential differential scan on the mutable-bag corpus.
//!
//! The workload asks whether `foo1` (clone-then-merge) and `foo2`
//! (merge-into-fresh) ever disagree on plain `CBag`s. They never do, so
//! every tuple in the space is visited and the two arms do identical
//! work. Build with `--no-default-features` to measure the sequential
//! fallback that `differential_search` degrades to without rayon.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use minioo::harness::diff::{differential_search, differential_search_sequential, DiffSpec};
use minioo::parser::load_program;
use minioo::resolve::{resolve, ResolvedProgram};
use std::path::Path;

fn bag_program() -> ResolvedProgram {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus/src/cbag.moo");
    let text = std::fs::read_to_string(&path).expect("corpus/src/cbag.moo");
    let prog = load_program(&[("src/cbag.moo".into(), text)]).expect("corpus parses");
    resolve(prog).expect("corpus resolves")
}

fn spec_over(universe: Vec<i64>, max_size: usize) -> DiffSpec {
    DiffSpec {
        entry_a: "foo1".into(),
        entry_b: "foo2".into(),
        factory: "make_cbag".into(),
        universe,
        max_size,
    }
}

fn bench_search(c: &mut Criterion) {
    let prog = bag_program();
    let mut group = c.benchmark_group("differential-search");
    // (label, universe, max multiset size, resulting tuple count)
    let sizes = [
        ("216-tuples", vec![1, 2], 2, 216u64),
        ("1000-tuples", vec![1, 2, 3], 2, 1000),
        ("8000-tuples", vec![1, 2, 3], 3, 8000),
    ];
    for (label, universe, max_size, tuples) in sizes {
        let spec = spec_over(universe, max_size);
        group.throughput(Throughput::Elements(tuples));
        group.sample_size(20);
        group.bench_with_input(BenchmarkId::new("parallel", label), &spec, |b, s| {
            b.iter(|| {
                let report = differential_search(&prog, s).unwrap();
                assert!(report.witness.is_none());
                report
            })
        });
        group.bench_with_input(BenchmarkId::new("sequential", label), &spec, |b, s| {
            b.iter(|| {
                let report = differential_search_sequential(&prog, s).unwrap();
                assert!(report.witness.is_none());
                report
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_search);
criterion_main!(benches);
