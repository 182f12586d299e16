//! Criterion benchmarks of the core updates and queries.

use std::hint::black_box;
use std::time::{Duration, Instant};

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use dynstr::Collection;
use dynstr_bench::{random_text, Workload};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SIZES: [u32; 3] = [10, 14, 18];

fn updates(c: &mut Criterion) {
    let mut group = c.benchmark_group("updates");
    for k in SIZES {
        let n = 1u64 << k;
        let mut w = Workload::new(u64::from(k), 1 << (k + 1));
        group.bench_with_input(BenchmarkId::new("concat", n), &n, |b, &n| {
            b.iter_custom(|iters| {
                let mut total = Duration::ZERO;
                for _ in 0..iters {
                    let (x, y) = (w.fragment(n / 2), w.fragment(n / 2));
                    let start = Instant::now();
                    black_box(w.collection().concat(x, y).unwrap());
                    total += start.elapsed();
                }
                total
            });
        });
        let mut w = Workload::new(u64::from(k), 1 << (k + 1));
        group.bench_with_input(BenchmarkId::new("split", n), &n, |b, &n| {
            b.iter_custom(|iters| {
                let mut total = Duration::ZERO;
                for _ in 0..iters {
                    let x = w.fragment(n);
                    let start = Instant::now();
                    black_box(w.collection().split(x, n / 3).unwrap());
                    total += start.elapsed();
                }
                total
            });
        });
    }
    group.finish();
}

fn queries(c: &mut Criterion) {
    let mut group = c.benchmark_group("queries");
    for k in SIZES {
        let n = 1usize << k;
        let mut rng = ChaCha8Rng::seed_from_u64(u64::from(k));
        let mut coll = Collection::with_seed(u64::from(k));
        let mut text = random_text(&mut rng, n, 4);
        let x = coll.make_string(&text).unwrap();
        text[n - 2] = u32::from('z');
        let y = coll.make_string(&text).unwrap();
        group.bench_with_input(BenchmarkId::new("lcp", n), &n, |b, _| {
            b.iter(|| coll.lcp(x, y).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("compare", n), &n, |b, _| {
            b.iter(|| coll.compare(x, y).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("make", n), &n, |b, _| {
            b.iter_batched(
                || (Collection::with_seed(1), text.clone()),
                |(mut fresh, t)| fresh.make_string(&t).unwrap(),
                BatchSize::LargeInput,
            );
        });
    }
    group.finish();
}

criterion_group!(benches, updates, queries);
criterion_main!(benches);
