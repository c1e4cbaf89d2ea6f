use criterion::{black_box, criterion_group, criterion_main, Criterion};

use relcat_core::classify::{classification_diagram, segal_check};
use relcat_core::harness::corpus;
use relcat_core::sset::nerve;
use relcat_core::Budget;

fn nerves(c: &mut Criterion) {
    for name in ["zmod2.relcat", "pushout_apex.relcat", "idempotent.relcat"] {
        let m = corpus::relcat(name).unwrap();
        c.bench_function(&format!("nerve {name} degree 4"), |b| {
            b.iter(|| nerve(black_box(m.base()), 4, Budget::default()).unwrap())
        });
    }
}

fn segal(c: &mut Criterion) {
    let m = corpus::relcat("zmod2.relcat").unwrap();
    c.bench_function("L_C zmod2 n=3 and Segal n=2,3", |b| {
        b.iter(|| {
            let d = classification_diagram(&m, 3, 4, Budget::default()).unwrap();
            for n in 2..=3 {
                assert!(segal_check(&d.spaces, n, Budget::default()).unwrap().strict_iso);
            }
        })
    });
}

criterion_group!(benches, nerves, segal);
criterion_main!(benches);
