use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use knzeta::{domain, Engine};

fn amplitude(c: &mut Criterion) {
    let mut g = c.benchmark_group("zn_sectors");
    g.sample_size(10);
    for n in [4u32, 5, 6] {
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, &n| {
            b.iter(|| Engine::new(n).unwrap().zn_sectors().unwrap())
        });
    }
    g.finish();
}

fn evaluation(c: &mut Criterion) {
    let mut g = c.benchmark_group("eval_at_witness");
    for n in [4u32, 5, 6] {
        let mut e = Engine::new(n).unwrap();
        let sum = e.zn_sectors().unwrap();
        let w = domain::to_assignment(&domain::witness_point(e.ctx()).unwrap());
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| sum.eval(3.0, &w).unwrap())
        });
    }
    g.finish();
}

fn memo_hit(c: &mut Criterion) {
    let mut e = Engine::new(6).unwrap();
    e.zn_sectors().unwrap();
    c.bench_function("zn_sectors_memoized_6", |b| {
        b.iter(|| e.zn_sectors().unwrap())
    });
}

criterion_group!(benches, amplitude, evaluation, memo_hit);
criterion_main!(benches);
