use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use discord_core::correlations::{information_deficit, quantum_discord, ObjectiveKernel};
use discord_core::entanglement::{geometric_cq_distance, measurement_entanglement};
use discord_core::optimizer::{grid_oracle_qubit, GridResolution};
use discord_core::random::{ginibre_mixed, random_basis};
use discord_core::state::von_neumann_entropy;
use discord_core::OptimizerConfig;

fn entropy(c: &mut Criterion) {
    let mut group = c.benchmark_group("entropy");
    for (da, db) in [(2, 2), (3, 3), (4, 4)] {
        let s = ginibre_mixed(&[da, db], da * db, 1).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(format!("{da}x{db}")), &s, |b, s| {
            b.iter(|| von_neumann_entropy(black_box(s)))
        });
    }
    group.finish();
}

fn kernel(c: &mut Criterion) {
    let mut group = c.benchmark_group("kernel");
    for (da, db) in [(2, 2), (3, 2), (4, 2)] {
        let s = ginibre_mixed(&[da, db], da * db, 2).unwrap();
        let k = ObjectiveKernel::new(&s).unwrap();
        let basis = random_basis(da, 3);
        group.bench_function(format!("deficit {da}x{db}"), |b| b.iter(|| k.deficit(black_box(&basis))));
        group.bench_function(format!("discord {da}x{db}"), |b| b.iter(|| k.discord(black_box(&basis))));
        group.bench_function(format!("certificate {da}x{db}"), |b| {
            b.iter(|| measurement_entanglement(black_box(&s), &basis).unwrap())
        });
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let s = ginibre_mixed(&[2, 2], 4, 4).unwrap();
    let k = ObjectiveKernel::new(&s).unwrap();
    c.bench_function("grid oracle 2x2", |b| {
        b.iter(|| grid_oracle_qubit(|basis| k.deficit(basis), 2, GridResolution::default()).unwrap())
    });
}

fn minimize(c: &mut Criterion) {
    let mut group = c.benchmark_group("minimize");
    group.sample_size(20);
    let config = OptimizerConfig::with_seed(5);
    for (da, db) in [(2, 2), (3, 3)] {
        let s = ginibre_mixed(&[da, db], da * db, 6).unwrap();
        group.bench_function(format!("discord {da}x{db}"), |b| b.iter(|| quantum_discord(&s, &config).unwrap()));
        group.bench_function(format!("deficit {da}x{db}"), |b| b.iter(|| information_deficit(&s, &config).unwrap()));
    }
    let s = ginibre_mixed(&[2, 2], 4, 7).unwrap();
    group.sample_size(10);
    group.bench_function("geometric 2x2", |b| b.iter(|| geometric_cq_distance(&s, &config).unwrap()));
    group.finish();
}

criterion_group!(benches, entropy, kernel, oracle, minimize);
criterion_main!(benches);
