//! Benchmark fixtures and groups for the solver, the clustering step and a short AMA-K run.

use std::hint::black_box;

use amak_core::backtest::SyntheticSpec;
use amak_core::clustering::{kmu_online, KmuParams};
use amak_core::experts::{log_optimal, SolverOptions};
use amak_core::market_data::{compute_relatives, window_vectors, MarketVector};
use amak_core::{generate_synthetic, Amak, AmakConfig, PriceRelativeMatrix};
use criterion::{BenchmarkId, Criterion, Throughput};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn market(n_days: usize, m_assets: usize, seed: u64) -> PriceRelativeMatrix {
    let spec = SyntheticSpec {
        n_days,
        m_assets,
        seed,
        ..SyntheticSpec::default()
    };
    compute_relatives(&generate_synthetic(&spec).expect("valid spec")).expect("two or more rows")
}

/// `n` random relatives rows over `m` assets, roughly 1% daily moves.
pub fn similar_rows(n: usize, m: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..m).map(|_| rng.random_range(0.97..1.03)).collect())
        .collect()
}

pub fn solver(c: &mut Criterion) {
    let mut group = c.benchmark_group("log_optimal");
    for (n, m) in [(10, 5), (100, 5), (300, 20)] {
        let rows = similar_rows(n, m, 1);
        let refs: Vec<&[f64]> = rows.iter().map(Vec::as_slice).collect();
        group.throughput(Throughput::Elements(n as u64));
        group.bench_with_input(
            BenchmarkId::from_parameter(format!("{n}x{m}")),
            &refs,
            |b, refs| b.iter(|| log_optimal(black_box(refs), &SolverOptions::default())),
        );
    }
    group.finish();
}

pub fn clustering(c: &mut Criterion) {
    let r = market(400, 10, 2);
    let mut group = c.benchmark_group("kmu_online");
    for (w, k) in [(1, 3), (5, 40), (5, 63)] {
        let vectors: Vec<MarketVector> =
            window_vectors(r.view(), w, 0..r.n_days()).expect("windows fit");
        group.bench_function(format!("w{w}_c{k}_n{}", vectors.len()), |b| {
            b.iter(|| kmu_online(black_box(vectors.clone()), k, &KmuParams::default(), 7))
        });
    }
    group.finish();
}

pub fn amak_run(c: &mut Criterion) {
    let r = market(260, 5, 3);
    let config = AmakConfig::with_horizons(&[10, 60, 120], 0);
    let mut group = c.benchmark_group("amak");
    group.sample_size(10);
    for parallel in [false, true] {
        let config = AmakConfig {
            parallel,
            ..config.clone()
        };
        let label = if parallel { "parallel" } else { "sequential" };
        group.bench_function(
            format!("{label}_{}_days", r.n_days() - config.warmup()),
            |b| {
                b.iter(|| {
                    let mut amak = Amak::new(&config, r.n_assets()).expect("valid config");
                    for t in config.warmup()..r.n_days() {
                        black_box(amak.step(t, r.view().prefix(t)).expect("step"));
                    }
                })
            },
        );
    }
    group.finish();
}

pub fn benchmarks(c: &mut Criterion) {
    solver(c);
    clustering(c);
    amak_run(c);
}
