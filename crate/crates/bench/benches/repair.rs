//! Runtime comparison of the repair algorithms on a fixed corrupted
//! instance: the combinatorial sweeps against the l1 baselines, and the
//! full Floyd-Warshall sweep against its prior-information shortcut.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use metric_repair::instances::{gen_metric, perturb, CorruptionSign, CorruptionSpec, InstanceKind, InstanceSpec};
use metric_repair::l1::{irl1_default_eps, irl1_repair, l1_repair};
use metric_repair::{
    broken_triangles, fw_domr, fw_prior, heuristic_repair, iomr_repair, shift_repair,
    DistanceMatrix, RepairMode, DEFAULT_TOL,
};

fn corrupted(n: usize, frac: f64, sign: CorruptionSign, seed: u64) -> DistanceMatrix {
    let spec = InstanceSpec {
        kind: InstanceKind::Euclidean { dim: 2 },
        n,
        seed,
    };
    let d = gen_metric(&spec).unwrap();
    let k = (frac * d.pair_count() as f64).round() as usize;
    let (dp, _) = perturb(&d, &CorruptionSpec::new(k, sign, seed)).unwrap();
    dp
}

fn bench_sweeps(c: &mut Criterion) {
    let dp = corrupted(50, 0.1, CorruptionSign::Mixed, 1);
    let mut g = c.benchmark_group("n50_mixed_10pct");
    g.bench_function("fw_domr", |b| b.iter(|| fw_domr(&dp)));
    g.bench_function("iomr", |b| b.iter(|| iomr_repair(&dp)));
    g.bench_function("heuristic", |b| b.iter(|| heuristic_repair(&dp)));
    g.bench_function("shift", |b| b.iter(|| shift_repair(&dp)));
    g.finish();
}

fn bench_prior_shortcut(c: &mut Criterion) {
    // low corruption is where the restricted pass should win big
    let dp = corrupted(50, 0.02, CorruptionSign::Positive, 2);
    let broken = broken_triangles(&dp, DEFAULT_TOL);
    let mut g = c.benchmark_group("prior_information");
    g.bench_function("fw_domr_full", |b| b.iter(|| fw_domr(&dp)));
    g.bench_function("fw_prior_given_list", |b| {
        b.iter_batched(|| broken.clone(), |t| fw_prior(&dp, &t).unwrap(), BatchSize::SmallInput)
    });
    g.finish();
}

fn bench_l1(c: &mut Criterion) {
    let dp = corrupted(20, 0.1, CorruptionSign::Negative, 3);
    let mut g = c.benchmark_group("l1_n20");
    g.sample_size(20);
    g.bench_function("l1_general", |b| {
        b.iter(|| l1_repair(&dp, RepairMode::General).unwrap())
    });
    g.bench_function("irl1_3_general", |b| {
        b.iter(|| irl1_repair(&dp, RepairMode::General, 3, irl1_default_eps(dp.max_entry())).unwrap())
    });
    g.bench_function("heuristic", |b| b.iter(|| heuristic_repair(&dp)));
    g.finish();
}

criterion_group!(benches, bench_sweeps, bench_prior_shortcut, bench_l1);
criterion_main!(benches);
