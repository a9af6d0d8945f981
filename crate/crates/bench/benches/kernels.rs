use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use florseq_core::arrays::{search_max_rows, SearchOptions};
use florseq_core::correlation::{family_stats, xcorr_fft, xcorr_naive, Method};
use florseq_core::family::{build_family, sequences, FamilySpec};
use florseq_core::seqgen::{gen_frank, gen_frank_zadoff, SigmaTable};
use florseq_core::{Permutation, TuscanArray};

fn search(c: &mut Criterion) {
    let mut group = c.benchmark_group("search");
    group.sample_size(10);
    for n in [5usize, 6, 7] {
        group.bench_with_input(BenchmarkId::new("linear", n), &n, |b, &n| {
            b.iter(|| search_max_rows(black_box(n), &SearchOptions::linear()).unwrap())
        });
    }
    group.bench_function("circular/7", |b| {
        b.iter(|| search_max_rows(black_box(7), &SearchOptions::circular()).unwrap())
    });
    group.finish();
}

fn correlation(c: &mut Criterion) {
    let mut group = c.benchmark_group("xcorr");
    for n in [16usize, 32, 64] {
        let u = gen_frank_zadoff(n).unwrap();
        let pi = Permutation::new((0..n).rev().collect()).unwrap();
        let v = gen_frank(n, &pi, &SigmaTable::random(n, 1)).unwrap();
        let p = n * n;
        group.bench_with_input(BenchmarkId::new("naive", p), &p, |b, _| {
            b.iter(|| xcorr_naive(black_box(&u), black_box(&v)).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("fft", p), &p, |b, _| {
            b.iter(|| xcorr_fft(black_box(&u), black_box(&v)).unwrap())
        });
    }
    group.finish();
}

fn family(c: &mut Criterion) {
    let array = TuscanArray::from_json(include_str!("../../../fixtures/table1_6x6.json")).unwrap();
    let spec = FamilySpec::new(array, SigmaTable::zero(6));
    let seqs = sequences(&build_family(&spec).unwrap());
    c.bench_function("family_stats/N=6", |b| {
        b.iter(|| family_stats(black_box(&seqs), Method::Naive).unwrap())
    });
}

criterion_group!(benches, search, correlation, family);
criterion_main!(benches);
