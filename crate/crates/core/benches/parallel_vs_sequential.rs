//! Sequential vs rayon data-parallel execution on the hot paths: layer
//! growth, the two-pair diameter scan, and the structure-identity sweep.

use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use liegrowth_core::algebra::{build_classical, check_identity_with, IdentityKind, LieType};
use liegrowth_core::exec::Strategy;
use liegrowth_core::field::FieldCtx;
use liegrowth_core::growth::{
    diameter_lower_bound, two_pair_family, GrowthConfig, GrowthSet, Universe,
};
use liegrowth_core::linalg::Coords;

fn universe(ty: LieType, p: u64) -> Arc<Universe> {
    let g = build_classical(ty, Arc::new(FieldCtx::prime(p).unwrap())).unwrap();
    Arc::new(Universe::new(Arc::new(g)))
}

fn strategies() -> [(&'static str, Strategy); 2] {
    [("sequential", Strategy::Sequential), ("parallel", Strategy::Parallel)]
}

fn bench_grow_layers(c: &mut Criterion) {
    let u = universe(LieType::Sl(3), 7);
    let dim = u.dim();
    let mut base: Vec<Coords> = vec![vec![0; dim]];
    for i in 0..dim {
        let mut v = vec![0; dim];
        v[i] = 1;
        base.push(v.clone());
        v[i] = 6;
        base.push(v);
    }
    let mut group = c.benchmark_group("grow_layers_sl3_f7");
    group.sample_size(10);
    for (name, strategy) in strategies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &strategy, |b, &strategy| {
            b.iter(|| {
                let cfg = GrowthConfig { strategy, ..GrowthConfig::default() };
                let mut a = GrowthSet::new(u.clone(), &base, cfg).unwrap();
                a.grow_to(3).unwrap();
                a.layer(3).len()
            })
        });
    }
    group.finish();
}

fn bench_diameter_scan(c: &mut Criterion) {
    let u = universe(LieType::Sl(2), 5);
    let family = two_pair_family(&u);
    let mut group = c.benchmark_group("diameter_scan_sl2_f5");
    group.sample_size(10);
    for (name, strategy) in strategies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &strategy, |b, &strategy| {
            b.iter(|| {
                let cfg = GrowthConfig { strategy, ..GrowthConfig::default() };
                diameter_lower_bound(&u, &family, &cfg).unwrap().max_fill
            })
        });
    }
    group.finish();
}

fn bench_identity_sweep(c: &mut Criterion) {
    let g = Arc::new(
        build_classical(LieType::F4, Arc::new(FieldCtx::prime(7).unwrap())).unwrap(),
    );
    let mut group = c.benchmark_group("jacobi_sweep_f4_f7");
    group.sample_size(10);
    for (name, strategy) in strategies() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &strategy, |b, &strategy| {
            b.iter(|| {
                let rep = check_identity_with(&g, IdentityKind::Jacobi, 1, strategy);
                assert!(rep.counterexample.is_none());
                rep.mode
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_grow_layers, bench_diameter_scan, bench_identity_sweep);
criterion_main!(benches);
