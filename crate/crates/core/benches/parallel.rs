//! Single-threaded vs pooled execution of the hot paths. Build with
//! `--no-default-features` to measure the sequential fallback instead.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use nfl_lab::codec::encode_context;
use nfl_lab::distributions::ProblemDistribution;
use nfl_lab::domain::{ProblemContext, DEFAULT_FUNCTION_CAP as CAP};
use nfl_lab::machine::{enumerate_halting, Budget};
use nfl_lab::optimisers::DEFAULT_TREE_CAP;
use nfl_lab::par;
use nfl_lab::verify::nfl_holds_exact;

fn thread_counts() -> Vec<usize> {
    let max = std::thread::available_parallelism().map_or(1, |n| n.get());
    if par::is_parallel() {
        vec![1, max.max(4)]
    } else {
        vec![1]
    }
}

fn halting_enumeration(c: &mut Criterion) {
    let cond = encode_context(&ProblemContext::standard(8, 2).unwrap());
    let budget = Budget::new(16, 256).unwrap();
    let mut group = c.benchmark_group("enumerate_halting");
    group.sample_size(10);
    for threads in thread_counts() {
        group.bench_with_input(BenchmarkId::from_parameter(threads), &threads, |b, &t| {
            b.iter(|| par::with_threads(t, || black_box(enumerate_halting(&cond, budget).unwrap().len())))
        });
    }
    group.finish();
}

fn exhaustive_nfl(c: &mut Criterion) {
    let ctx = ProblemContext::standard(4, 2).unwrap();
    let p = ProblemDistribution::random_simplex(&ctx, 7, CAP).unwrap();
    let mut group = c.benchmark_group("nfl_holds_exact");
    group.sample_size(10);
    for threads in thread_counts() {
        group.bench_with_input(BenchmarkId::from_parameter(threads), &threads, |b, &t| {
            b.iter(|| par::with_threads(t, || black_box(nfl_holds_exact(&p, DEFAULT_TREE_CAP).unwrap().holds)))
        });
    }
    group.finish();
}

criterion_group!(benches, halting_enumeration, exhaustive_nfl);
criterion_main!(benches);
