use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use relcat_bench::sample_matrix;
use relcat_core::homology::smith_normal_form;

fn snf(c: &mut Criterion) {
    let mut group = c.benchmark_group("smith normal form");
    for n in [8, 16, 32] {
        let a = sample_matrix(n, n + 3, n as u64);
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| smith_normal_form(black_box(a)))
        });
    }
    group.finish();
}

criterion_group!(benches, snf);
criterion_main!(benches);
