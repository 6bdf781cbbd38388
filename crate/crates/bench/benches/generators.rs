use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use nlsr_core::ito::{expand_evolution_increment, generator_from_increments};
use nlsr_core::master::MasterGenerator;
use nlsr_core::{DensityMatrix, DickeBasis, EnsembleParams};

fn params(n: u32) -> (EnsembleParams, DickeBasis) {
    let p = EnsembleParams::new(n, 0.3, 0.2, 0.05, 0.1).unwrap();
    (p, DickeBasis::new(n).unwrap())
}

fn rhs(c: &mut Criterion) {
    let mut group = c.benchmark_group("rhs");
    for n in [10u32, 40, 100] {
        let (p, b) = params(n);
        let gen = MasterGenerator::new(&p, &b).unwrap();
        let rho = DensityMatrix::basis_state(&b, b.fully_excited_index()).unwrap();
        let pops = rho.populations().to_dvector();
        group.bench_with_input(BenchmarkId::new("full", n), &rho, |bench, rho| {
            bench.iter(|| gen.rhs_full(black_box(rho.matrix())).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("diag", n), &pops, |bench, pops| {
            bench.iter(|| gen.rhs_diag(black_box(pops)).unwrap())
        });
    }
    group.finish();
}

fn ito(c: &mut Criterion) {
    let mut group = c.benchmark_group("ito");
    for n in [1u32, 10, 41] {
        let (p, b) = params(n);
        group.bench_function(BenchmarkId::new("expand_order24", n), |bench| {
            bench.iter(|| expand_evolution_increment(black_box(&p), &b, 24).unwrap())
        });
        group.bench_function(BenchmarkId::new("generator", n), |bench| {
            bench.iter(|| generator_from_increments(black_box(&p), &b))
        });
    }
    group.finish();
}

criterion_group!(benches, rhs, ito);
criterion_main!(benches);
