use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use hkl::dual::frobenius_via_duality;
use hkl::ff::{oracle, FFField};
use hkl::par::with_threads;
use hkl::pipeline::{build_setup, RunParams};
use std::hint::black_box;

fn paths() -> [(&'static str, usize); 2] {
    let cores = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(2)
        .max(2);
    [("sequential", 1), ("parallel", cores)]
}

fn frobenius_matrix(c: &mut Criterion) {
    let mut g = c.benchmark_group("frobenius_matrix");
    g.sample_size(10);
    for (p, n) in [(3u64, 2usize), (5, 1)] {
        let params = RunParams::new(p, 1, n, 1);
        let setup = build_setup(&params, None).unwrap();
        for (label, threads) in paths() {
            g.bench_with_input(
                BenchmarkId::new(label, format!("p{p}_n{n}")),
                &setup,
                |b, s| {
                    b.iter(|| with_threads(threads, || black_box(s.frobenius_matrix().unwrap())))
                },
            );
        }
    }
    g.finish();
}

fn duality(c: &mut Criterion) {
    let mut g = c.benchmark_group("frobenius_via_duality");
    g.sample_size(10);
    for (label, threads) in paths() {
        g.bench_function(BenchmarkId::new(label, "p3_n2"), |b| {
            b.iter(|| {
                with_threads(threads, || {
                    black_box(frobenius_via_duality(3, 1, 2, 1, 4).unwrap())
                })
            })
        });
    }
    g.finish();
}

fn enumeration(c: &mut Criterion) {
    let mut g = c.benchmark_group("kloosterman_counts");
    g.sample_size(10);
    let field = FFField::new(7, 2).unwrap();
    for (label, threads) in paths() {
        g.bench_function(BenchmarkId::new(label, "q49_n2"), |b| {
            b.iter(|| {
                with_threads(threads, || {
                    black_box(oracle::kloosterman_counts(&field, 2, 1).unwrap())
                })
            })
        });
    }
    g.finish();
}

criterion_group!(benches, frobenius_matrix, duality, enumeration);
criterion_main!(benches);
