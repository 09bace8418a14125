use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use kaluza::seqcheck::gen_log_convex;
use kaluza::walkfactor::{
    build_w, certify_id_two_sided, gen_vspec, geometric_tail, ladder_heights_dp, normalize_v,
    wiener_hopf_factor, CertifyConfig,
};
use kaluza::{compound_geometric, levy_coeffs, LatticePmf};

fn pmf(len: usize) -> LatticePmf {
    LatticePmf::from_weights(&gen_log_convex(11, len).unwrap().values).unwrap()
}

fn bench_recursions(c: &mut Criterion) {
    let mut group = c.benchmark_group("lattice_recursions");
    for len in [64usize, 256, 1024] {
        let p = pmf(len);
        group.bench_with_input(BenchmarkId::new("levy_coeffs", len), &p, |b, p| {
            b.iter(|| levy_coeffs(black_box(p), len - 1).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("compound_geometric", len), &p, |b, p| {
            b.iter(|| compound_geometric(black_box(p), 1e-12).unwrap())
        });
    }
    group.finish();
}

fn bench_factorization(c: &mut Criterion) {
    let v = normalize_v(
        &geometric_tail(&normalize_v(&gen_vspec(5, 32).unwrap()).unwrap(), 16).unwrap(),
    )
    .unwrap();
    let w = build_w(&v).unwrap();
    let mut group = c.benchmark_group("ladder_factor");
    group.bench_function("wiener_hopf_exact", |b| {
        b.iter(|| wiener_hopf_factor(black_box(&w)).unwrap())
    });
    group.sample_size(10);
    group.bench_function("dp_2000_steps", |b| {
        b.iter(|| ladder_heights_dp(black_box(&w), 2000, 200).unwrap())
    });
    group.finish();
}

fn bench_pipeline(c: &mut Criterion) {
    let cfg = CertifyConfig::default();
    let drivers: Vec<_> = (0..8).map(|s| gen_vspec(s, 32).unwrap()).collect();
    c.bench_function("certify_two_sided_x8", |b| {
        b.iter(|| {
            for v in &drivers {
                black_box(certify_id_two_sided(v, &cfg).unwrap());
            }
        })
    });
}

criterion_group!(
    benches,
    bench_recursions,
    bench_factorization,
    bench_pipeline
);
criterion_main!(benches);
