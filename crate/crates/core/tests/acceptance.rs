//! Acceptance suite. Each test prints one `PASS` or `FAIL` line and then
//! asserts, so `cargo test --test acceptance -- --nocapture` doubles as a
//! report.

use amak_core::agents::SubAgentConfig;
use amak_core::backtest::{BacktestConfig, Regime, StrategyKind, SyntheticSpec};
use amak_core::baselines::{
    best_stock_trajectory, crp_trajectory, eg_trajectory, ubah_trajectory, EgConfig,
};
use amak_core::clustering::{kmu_online, manhattan, KmuParams, LifecycleEventKind};
use amak_core::experts::{
    correlation_similar_set, log_growth, log_optimal, ExpertSpec, SolverOptions,
};
use amak_core::market_data::{compute_relatives, MarketVector};
use amak_core::metrics::{asr, mdd, AsrMode};
use amak_core::{
    generate_synthetic, run_backtest, Amak, AmakConfig, PriceRelativeMatrix, WealthTrajectory,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn report(id: u32, name: &str, pass: bool, detail: impl AsRef<str>) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("{verdict} criterion {id:>2} {name}: {}", detail.as_ref());
}

fn synthetic(n_days: usize, m: usize, seed: u64) -> PriceRelativeMatrix {
    let spec = SyntheticSpec {
        n_days,
        m_assets: m,
        seed,
        ..SyntheticSpec::default()
    };
    compute_relatives(&generate_synthetic(&spec).unwrap()).unwrap()
}

#[test]
fn c01_asr_reproduces_table() {
    let pairs = [
        (2.052, 0.126),
        (1.450, 0.089),
        (0.640, 0.038),
        (0.693, 0.041),
    ];
    let mut worst: f64 = 0.0;
    for (apy, want) in pairs {
        let got = asr(apy, AsrMode::Constant, None).unwrap();
        worst = worst.max((got - want).abs());
    }
    let pass = worst <= 0.001;
    report(
        1,
        "ASR arithmetic",
        pass,
        format!("max |error| = {worst:.5} (tolerance 0.001)"),
    );
    assert!(pass);
}

/// Best product over the 0.001 simplex grid.
fn grid_max(rows: &[&[f64]]) -> (f64, Vec<f64>) {
    const STEPS: usize = 1000;
    let m = rows[0].len();
    let mut best = (f64::NEG_INFINITY, vec![]);
    let mut consider = |b: Vec<f64>| {
        let v = log_growth(&b, rows);
        if v > best.0 {
            best = (v, b);
        }
    };
    match m {
        1 => consider(vec![1.0]),
        2 => (0..=STEPS).for_each(|i| {
            let a = i as f64 / STEPS as f64;
            consider(vec![a, 1.0 - a]);
        }),
        3 => {
            for i in 0..=STEPS {
                for j in 0..=STEPS - i {
                    let (a, b) = (i as f64 / STEPS as f64, j as f64 / STEPS as f64);
                    consider(vec![a, b, (1.0 - a - b).max(0.0)]);
                }
            }
        }
        _ => unreachable!(),
    }
    best
}

/// Zooms in around a grid point with successively finer simplex grids.
fn refined_max(rows: &[&[f64]], start: Vec<f64>) -> f64 {
    let m = start.len();
    let mut centre = start;
    let mut value = log_growth(&centre, rows);
    let mut step: f64 = 1e-3;
    while step > 1e-9 {
        let mut improved = true;
        while improved {
            improved = false;
            for from in 0..m {
                for to in 0..m {
                    if from == to {
                        continue;
                    }
                    let mut b = centre.clone();
                    let moved = step.min(b[from]);
                    if moved <= 0.0 {
                        continue;
                    }
                    b[from] -= moved;
                    b[to] += moved;
                    let v = log_growth(&b, rows);
                    if v > value {
                        value = v;
                        centre = b;
                        improved = true;
                    }
                }
            }
        }
        step /= 4.0;
    }
    value
}

#[test]
fn c02_solver_matches_grid_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst_gap: f64 = 0.0;
    let mut worst_refined: f64 = 0.0;
    let mut pass = true;
    for _ in 0..50 {
        let m = rng.random_range(1..=3);
        let n = rng.random_range(1..=8);
        let data: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.random_range(0.5..2.0)).collect())
            .collect();
        let rows: Vec<&[f64]> = data.iter().map(Vec::as_slice).collect();
        let b = log_optimal(&rows, &SolverOptions::default()).unwrap();
        let solver = log_growth(b.weights(), &rows).exp();
        let (grid_log, grid_b) = grid_max(&rows);
        let grid = grid_log.exp();
        let refined = refined_max(&rows, grid_b).exp();
        // the grid is a lower bound on the true maximum
        let gap = (grid - solver) / grid;
        let refined_gap = ((refined - solver) / refined).abs();
        worst_gap = worst_gap.max(gap);
        worst_refined = worst_refined.max(refined_gap);
        pass &= gap <= 1e-6 && refined_gap <= 1e-6;
    }
    report(
        2,
        "growth-optimal solver",
        pass,
        format!(
            "50 instances, worst shortfall vs 0.001 grid = {worst_gap:.2e}, worst |gap| vs refined grid = {worst_refined:.2e} (tolerance 1e-6)"
        ),
    );
    assert!(pass);
}

#[test]
fn c03_mdd_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let n = rng.random_range(1..=200);
        let mut s = 1.0;
        let values: Vec<f64> = (0..n)
            .map(|i| {
                if i > 0 {
                    s *= rng.random_range(0.8..1.25);
                }
                s
            })
            .collect();
        let mut brute: f64 = 0.0;
        for j in 0..n {
            for i in 0..=j {
                brute = brute.min(values[j] / values[i] - 1.0);
            }
        }
        let got = mdd(&WealthTrajectory::from_values(values).unwrap());
        worst = worst.max((got - brute).abs());
    }
    let pass = worst <= 1e-12;
    report(
        3,
        "MDD oracle",
        pass,
        format!("200 trajectories, max |error| = {worst:.2e} (tolerance 1e-12)"),
    );
    assert!(pass);
}

/// Correlation through standardised scores; independent of the library's accumulation order.
fn oracle_pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let z = |v: &[f64]| {
        let mean = v.iter().sum::<f64>() / n;
        let sd = (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n).sqrt();
        v.iter().map(|x| (x - mean) / sd).collect::<Vec<_>>()
    };
    z(a).iter().zip(z(b)).map(|(x, y)| x * y).sum::<f64>() / n
}

#[test]
fn c04_correlation_set_matches_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut mismatches = 0;
    let mut sizes = Vec::new();
    for case in 0..20 {
        let m = rng.random_range(2..=4);
        let n = rng.random_range(20..=80);
        let data: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..m).map(|_| rng.random_range(0.95..1.05)).collect())
            .collect();
        let r = PriceRelativeMatrix::from_rows(data.clone()).unwrap();
        let w = rng.random_range(1..=5);
        let rho = rng.random_range(1..=9) as f64 / 10.0;
        let memory_start = rng.random_range(0..n / 3);
        let t = n;

        let flat = |from: usize, to: usize| data[from..to].concat();
        let current = flat(t - w, t);
        let mut expected = Vec::new();
        for i in 0..t {
            if i >= w && i - w >= memory_start && oracle_pearson(&flat(i - w, i), &current) >= rho {
                expected.push(i);
            }
        }
        let got =
            correlation_similar_set(r.view(), t, &ExpertSpec::new(w, rho).unwrap(), memory_start);
        if got.days != expected {
            mismatches += 1;
            println!("case {case}: library {:?} vs scan {:?}", got.days, expected);
        }
        sizes.push(expected.len());
    }
    let pass = mismatches == 0;
    report(
        4,
        "correlation-set oracle",
        pass,
        format!("20 instances, {mismatches} mismatches, set sizes {sizes:?}"),
    );
    assert!(pass);
}

#[test]
fn c05_clustering_postconditions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let params = KmuParams::default();
    let mut violations = 0;
    for _ in 0..20 {
        let n = rng.random_range(5..=150);
        let c = rng.random_range(1..=6);
        let vectors: Vec<MarketVector> = (0..n)
            .map(|day| MarketVector {
                v: std::array::from_fn(|_| rng.random_range(-3.0..3.0)),
                window_size: 2,
                day,
            })
            .collect();
        let model = kmu_online(vectors, c, &params, rng.random()).unwrap();
        for (v, &k) in model.vectors().iter().zip(model.assignments()) {
            let own = manhattan(&v.v, &model.centroids()[k]).unwrap();
            if model
                .centroids()
                .iter()
                .any(|o| manhattan(&v.v, o).unwrap() < own)
            {
                violations += 1;
            }
        }
    }

    let mut recovered = 0;
    for seed in 0..20u64 {
        let mut crng = ChaCha8Rng::seed_from_u64(500 + seed);
        let vectors: Vec<MarketVector> = (0..40)
            .map(|day| {
                let base = if day % 2 == 0 { 0.0 } else { 10.0 };
                MarketVector {
                    v: std::array::from_fn(|_| base + crng.random_range(-1.0..1.0)),
                    window_size: 1,
                    day,
                }
            })
            .collect();
        let model = kmu_online(vectors, 2, &params, seed).unwrap();
        let a = model.assignments();
        let split = (0..40).all(|d| (a[d] == a[0]) == (d % 2 == 0));
        recovered += usize::from(split);
    }
    let pass = violations == 0 && recovered == 20;
    report(
        5,
        "clustering post-conditions",
        pass,
        format!("{violations} nearest-centroid violations over 20 sets; planted split recovered {recovered}/20"),
    );
    assert!(pass);
}

#[test]
fn c06_lifecycle_schedule() {
    let r = synthetic(601, 5, 6);
    let config = BacktestConfig {
        strategies: vec![StrategyKind::Amak],
        amak: AmakConfig::with_horizons(&[10], 6),
        ..BacktestConfig::default()
    };
    let res = run_backtest(&config, &r).unwrap();
    let events = &res.get(StrategyKind::Amak).unwrap().events;
    let days = |pred: fn(&LifecycleEventKind) -> bool| -> Vec<usize> {
        events
            .iter()
            .filter(|e| pred(&e.kind))
            .map(|e| e.t)
            .collect()
    };
    let adds = days(|k| matches!(k, LifecycleEventKind::AddCentroid { .. }));
    let resets = days(|k| matches!(k, LifecycleEventKind::Reset { .. }));
    let stepped = 11..r.n_days();
    let want_adds: Vec<usize> = stepped
        .clone()
        .filter(|t| t % 3 == 0 && t % 20 != 0)
        .collect();
    let want_resets: Vec<usize> = stepped.filter(|t| t % 20 == 0).collect();
    for e in events.iter().take(6) {
        println!("  {e}");
    }
    let pass = adds == want_adds && resets == want_resets;
    report(
        6,
        "lifecycle schedule",
        pass,
        format!(
            "{} add-centroid events, {} resets over {} days",
            adds.len(),
            resets.len(),
            r.n_days()
        ),
    );
    assert!(pass);
}

#[test]
fn c07_determinism_and_causality() {
    let r = synthetic(400, 4, 7);
    let config = BacktestConfig::default();
    let first = run_backtest(&config, &r).unwrap();
    let second = run_backtest(&config, &r).unwrap();
    let identical = first == second
        && first
            .strategies
            .iter()
            .zip(&second.strategies)
            .all(|(a, b)| a.events == b.events);

    // Best Stock chooses its asset with hindsight, so it is exempt.
    let causal: Vec<StrategyKind> = StrategyKind::ALL
        .into_iter()
        .filter(|&k| k != StrategyKind::BestStock)
        .collect();
    let config = BacktestConfig {
        strategies: causal.clone(),
        ..BacktestConfig::default()
    };
    let base = run_backtest(&config, &r).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(70);
    let m = r.n_assets();
    let mut leaks = 0;
    let mut changed_after = 0;
    for _ in 0..10 {
        let t = rng.random_range(base.eval_start..r.n_days() - 1);
        let mut flat = r.as_flat().to_vec();
        for x in &mut flat[t * m..(t + 1) * m] {
            *x *= rng.random_range(0.9..1.1);
        }
        let mutated = PriceRelativeMatrix::from_flat(flat, m).unwrap();
        let probe = run_backtest(&config, &mutated).unwrap();
        let upto = t - base.eval_start;
        for (a, b) in base.strategies.iter().zip(&probe.strategies) {
            if a.portfolios[..=upto] != b.portfolios[..=upto] {
                leaks += 1;
            }
            if a.portfolios[upto + 1..] != b.portfolios[upto + 1..] {
                changed_after += 1;
            }
        }
    }
    let pass = identical && leaks == 0;
    report(
        7,
        "determinism and causality",
        pass,
        format!(
            "repeat run bit-identical: {identical}; 10 probes x {} strategies: {leaks} leaks into days <= t, {changed_after} reacted afterwards",
            causal.len()
        ),
    );
    assert!(pass);
}

/// Flat stretches longer than the largest window, each followed by a day on
/// which asset 0 jumps, then a noisy active stretch. Flat windows carry no
/// correlation signal; their market vectors cluster together.
fn regime_cycling_market(n_days: usize, m: usize, seed: u64) -> PriceRelativeMatrix {
    const FLAT: usize = 7;
    const ACTIVE: usize = 6;
    let mut jump = vec![0.0; m];
    jump[0] = 0.03;
    let mut regimes = Vec::new();
    let mut start = 0;
    while start < n_days {
        regimes.push(Regime {
            start,
            drift: vec![0.0],
            volatility: vec![0.0],
        });
        regimes.push(Regime {
            start: start + FLAT,
            drift: jump.clone(),
            volatility: vec![0.01],
        });
        regimes.push(Regime {
            start: start + FLAT + 1,
            drift: vec![0.0],
            volatility: vec![0.02],
        });
        start += FLAT + ACTIVE;
    }
    let spec = SyntheticSpec {
        n_days,
        m_assets: m,
        regimes,
        seed,
        ..SyntheticSpec::default()
    };
    compute_relatives(&generate_synthetic(&spec).unwrap()).unwrap()
}

#[test]
fn c08_fallback_beats_no_fallback() {
    let r = regime_cycling_market(600, 3, 8);
    let with = AmakConfig::with_horizons(&[10, 120, 190], 8);
    let without = with.clone().map_horizons(|h| h.fallback = false);

    let run = |amak: AmakConfig| {
        let config = BacktestConfig {
            strategies: vec![StrategyKind::Amak, StrategyKind::CornK, StrategyKind::Ubah],
            amak,
            ..BacktestConfig::default()
        };
        run_backtest(&config, &r).unwrap()
    };
    let on = run(with.clone());
    let off = run(without);
    let wealth = |res: &amak_core::BacktestResult, k| res.get(k).unwrap().trajectory.terminal();
    let (s_on, s_off) = (
        wealth(&on, StrategyKind::Amak),
        wealth(&off, StrategyKind::Amak),
    );

    // How often experts with w > 2 found no correlated day.
    let mut amak = Amak::new(&with, r.n_assets()).unwrap();
    for t in with.warmup()..r.n_days() {
        amak.step(t, r.view().prefix(t)).unwrap();
    }
    let (mut total, mut cluster) = (0u64, 0u64);
    for agent in amak.agents() {
        for counts in agent.source_counts().by_window.iter().skip(2) {
            total += counts.iter().sum::<u64>();
            cluster += counts[1];
        }
    }

    let pass = s_on > s_off;
    report(
        8,
        "cluster fallback",
        pass,
        format!(
            "terminal wealth with fallback {s_on:.4} vs without {s_off:.4} (corn-k {:.4}, ubah {:.4}); {:.1}% of w > 2 selections used cluster days",
            wealth(&on, StrategyKind::CornK),
            wealth(&on, StrategyKind::Ubah),
            100.0 * cluster as f64 / total as f64
        ),
    );
    assert!(pass);
}

#[test]
fn c09_baseline_identities() {
    let mut best_fail = 0;
    for seed in 0..100 {
        let r = synthetic(120, 2 + (seed as usize % 4), 900 + seed);
        let best = best_stock_trajectory(r.view()).unwrap().terminal();
        let ubah = ubah_trajectory(r.view()).unwrap().terminal();
        best_fail += usize::from(best < ubah);
    }

    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let single: Vec<Vec<f64>> = (0..250).map(|_| vec![rng.random_range(0.9..1.1)]).collect();
    let single = PriceRelativeMatrix::from_rows(single).unwrap();
    let crp1 = crp_trajectory(single.view()).unwrap();
    let ubah1 = ubah_trajectory(single.view()).unwrap();
    let single_gap = crp1
        .values()
        .iter()
        .zip(ubah1.values())
        .map(|(a, b)| (a / b - 1.0).abs())
        .fold(0.0, f64::max);

    let r = synthetic(500, 4, 99);
    let crp = crp_trajectory(r.view()).unwrap();
    let deviation = |eta: f64| {
        let eg = eg_trajectory(r.view(), &EgConfig { eta }).unwrap();
        eg.values()
            .iter()
            .zip(crp.values())
            .map(|(a, b)| (a / b - 1.0).abs())
            .fold(0.0, f64::max)
    };
    let etas = [1e-2, 1e-3, 1e-4, 1e-5];
    let devs: Vec<f64> = etas.iter().map(|&e| deviation(e)).collect();
    let ratios: Vec<f64> = devs.iter().zip(etas).map(|(d, e)| d / e).collect();
    // O(eta): deviation / eta stays bounded as eta shrinks
    let linear =
        ratios.windows(2).all(|w| w[1] <= 1.1 * w[0]) && devs.windows(2).all(|w| w[1] < w[0]);

    let pass = best_fail == 0 && single_gap <= 1e-12 && linear;
    report(
        9,
        "baseline identities",
        pass,
        format!(
            "best < ubah on {best_fail}/100 markets; m = 1 CRP vs UBAH max gap {single_gap:.1e}; EG vs CRP deviation / eta = {:?}",
            ratios.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>()
        ),
    );
    assert!(pass);
}

#[test]
fn c10_wealth_identity() {
    let mut worst: f64 = 0.0;
    let mut runs = 0;
    for seed in 0..3 {
        let r = synthetic(360, 3 + seed as usize, 100 + seed);
        let config = BacktestConfig {
            amak: AmakConfig::with_horizons(&[10, 30, 60], seed),
            ..BacktestConfig::default()
        };
        let res = run_backtest(&config, &r).unwrap();
        for s in &res.strategies {
            let product: f64 = s
                .portfolios
                .iter()
                .enumerate()
                .map(|(i, b)| {
                    let x = r.row(res.eval_start + i);
                    b.weights().iter().zip(x).map(|(w, x)| w * x).sum::<f64>()
                })
                .product();
            worst = worst.max((s.trajectory.terminal() / product - 1.0).abs());
            runs += 1;
        }
    }
    let pass = worst <= 1e-9;
    report(
        10,
        "wealth identity",
        pass,
        format!("{runs} strategy runs, max relative error {worst:.2e} (tolerance 1e-9)"),
    );
    assert!(pass);
}

#[test]
fn corn_k_default_is_unbounded_without_fallback() {
    let c = SubAgentConfig::corn_k();
    assert!(!c.fallback);
    assert_eq!(c.memory, amak_core::Memory::Unbounded);
}
