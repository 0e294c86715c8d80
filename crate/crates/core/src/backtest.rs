//! Backtest engine and synthetic market generator.
//!
//! Every strategy decides the portfolio for day `t` from the relatives of
//! days `0..t` and is then paid `b_t . x_t`. Wealth is accounted over the
//! common span `eval_start..n_days`; a strategy whose own warm-up ends before
//! `eval_start` is stepped from its warm-up on so its state is built the same
//! way regardless of which other strategies run alongside it.

use std::fmt;
use std::str::FromStr;

use chrono::{Datelike, Days, NaiveDate, Weekday};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::agents::{horizon_seed, Amak, AmakConfig, Memory, SubAgent, SubAgentConfig};
use crate::baselines::{best_asset, eg_step, EgConfig};
use crate::clustering::LifecycleEvent;
use crate::error::{Error, Result};
use crate::market_data::{round_significant, PriceRelativeMatrix, PriceSeries, RelativesView};
use crate::metrics::{AsrMode, MetricReport};
use crate::portfolio::{uniform_portfolio, Portfolio, WealthTrajectory};

/// Full-history warm-up for CORN-K.
pub const CORN_K_WARMUP: usize = 300;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyKind {
    Amak,
    CornK,
    Ubah,
    Crp,
    BestStock,
    Eg,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::Amak,
        StrategyKind::CornK,
        StrategyKind::Ubah,
        StrategyKind::Crp,
        StrategyKind::BestStock,
        StrategyKind::Eg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StrategyKind::Amak => "amak",
            StrategyKind::CornK => "corn-k",
            StrategyKind::Ubah => "ubah",
            StrategyKind::Crp => "crp",
            StrategyKind::BestStock => "best-stock",
            StrategyKind::Eg => "eg",
        }
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown strategy {s:?}; expected one of amak, corn-k, ubah, crp, best-stock, eg"
                ))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestConfig {
    /// Run order; results keep this order.
    pub strategies: Vec<StrategyKind>,
    /// First evaluated day; defaults to the largest warm-up among the selected strategies.
    pub warmup_days: Option<usize>,
    pub amak: AmakConfig,
    pub corn_k: SubAgentConfig,
    pub corn_k_warmup: usize,
    pub eg: EgConfig,
    /// Fixed CRP weights; uniform when absent.
    pub crp_weights: Option<Vec<f64>>,
    pub seed: u64,
    pub asr_mode: AsrMode,
}

impl Default for BacktestConfig {
    fn default() -> Self {
        Self {
            strategies: StrategyKind::ALL.to_vec(),
            warmup_days: None,
            amak: AmakConfig::default(),
            corn_k: SubAgentConfig::corn_k(),
            corn_k_warmup: CORN_K_WARMUP,
            eg: EgConfig::default(),
            crp_weights: None,
            seed: 0,
            asr_mode: AsrMode::default(),
        }
    }
}

impl BacktestConfig {
    /// Sets the master seed and rederives every seeded component from it.
    pub fn reseed(&mut self, seed: u64) {
        self.seed = seed;
        for h in &mut self.amak.horizons {
            if let Memory::Days(d) = h.memory {
                h.seed = horizon_seed(seed, d);
            }
        }
        self.corn_k.seed = seed;
    }

    fn own_warmup(&self, kind: StrategyKind) -> usize {
        match kind {
            StrategyKind::Amak => self.amak.warmup(),
            StrategyKind::CornK => self.corn_k_warmup.max(self.corn_k.warmup()),
            _ => 0,
        }
    }

    /// First evaluated day.
    pub fn eval_start(&self) -> usize {
        self.warmup_days.unwrap_or_else(|| {
            self.strategies
                .iter()
                .map(|&k| self.own_warmup(k))
                .max()
                .unwrap_or(0)
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() {
            return Err(Error::Config("select at least one strategy".into()));
        }
        for (i, k) in self.strategies.iter().enumerate() {
            if self.strategies[..i].contains(k) {
                return Err(Error::Config(format!("strategy {k} selected twice")));
            }
        }
        if self.strategies.contains(&StrategyKind::Amak) {
            self.amak.validate()?;
        }
        if self.strategies.contains(&StrategyKind::CornK) {
            self.corn_k.validate()?;
        }
        if self.strategies.contains(&StrategyKind::Eg) {
            self.eg.validate()?;
        }
        if let Some(w) = &self.crp_weights {
            Portfolio::new(w.clone())?;
        }
        Ok(())
    }
}

/// An online strategy: decides day `t` from `history`, which holds exactly rows `0..t`.
trait Strategy {
    fn decide(&mut self, t: usize, history: RelativesView<'_>) -> Result<Portfolio>;

    /// First day on which the strategy needs to be stepped.
    fn first_step(&self, eval_start: usize) -> usize {
        eval_start
    }

    fn events(&self) -> Vec<LifecycleEvent> {
        Vec::new()
    }
}

struct AmakStrategy {
    inner: Amak,
    n_assets: usize,
}

impl Strategy for AmakStrategy {
    fn decide(&mut self, t: usize, history: RelativesView<'_>) -> Result<Portfolio> {
        if t < self.inner.warmup() {
            return uniform_portfolio(self.n_assets);
        }
        self.inner.step(t, history)
    }

    fn first_step(&self, eval_start: usize) -> usize {
        self.inner.warmup().min(eval_start)
    }

    fn events(&self) -> Vec<LifecycleEvent> {
        self.inner.events()
    }
}

struct CornKStrategy {
    inner: SubAgent,
    warmup: usize,
    n_assets: usize,
}

impl Strategy for CornKStrategy {
    fn decide(&mut self, t: usize, history: RelativesView<'_>) -> Result<Portfolio> {
        if t < self.warmup {
            return uniform_portfolio(self.n_assets);
        }
        self.inner.step(t, history)
    }

    fn first_step(&self, eval_start: usize) -> usize {
        self.warmup.min(eval_start)
    }

    fn events(&self) -> Vec<LifecycleEvent> {
        self.inner.events().to_vec()
    }
}

/// Buy-and-hold from a uniform allocation on the first evaluated day.
struct UbahStrategy {
    held: Vec<f64>,
}

impl Strategy for UbahStrategy {
    fn decide(&mut self, t: usize, history: RelativesView<'_>) -> Result<Portfolio> {
        if let Some(prev) = t.checked_sub(1).filter(|_| !self.held.is_empty()) {
            let x = history.row(prev);
            self.held.iter_mut().zip(x).for_each(|(h, x)| *h *= x);
        } else {
            self.held = vec![1.0; history.n_assets()];
        }
        Ok(Portfolio::from_scores(self.held.clone()))
    }
}

struct FixedStrategy(Portfolio);

impl Strategy for FixedStrategy {
    fn decide(&mut self, _t: usize, _history: RelativesView<'_>) -> Result<Portfolio> {
        Ok(self.0.clone())
    }
}

struct EgStrategy {
    eta: f64,
    current: Option<Portfolio>,
}

impl Strategy for EgStrategy {
    fn decide(&mut self, t: usize, history: RelativesView<'_>) -> Result<Portfolio> {
        let next = match self.current.take() {
            Some(b) => eg_step(&b, history.row(t - 1), self.eta)?,
            None => uniform_portfolio(history.n_assets())?,
        };
        self.current = Some(next.clone());
        Ok(next)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StrategyResult {
    pub kind: StrategyKind,
    /// `S_0 = 1` at `eval_start`, one value per evaluated day after that.
    pub trajectory: WealthTrajectory,
    pub metrics: MetricReport,
    /// Portfolio applied on each evaluated day.
    pub portfolios: Vec<Portfolio>,
    #[serde(skip)]
    pub events: Vec<LifecycleEvent>,
}

impl StrategyResult {
    /// Daily gross returns `b_t . x_t` over the evaluated span.
    pub fn gross_returns(&self, relatives: RelativesView<'_>, eval_start: usize) -> Vec<f64> {
        self.portfolios
            .iter()
            .enumerate()
            .map(|(i, b)| crate::baselines::gross(b.weights(), relatives.row(eval_start + i)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BacktestResult {
    /// First evaluated relatives row.
    pub eval_start: usize,
    /// Relatives rows available.
    pub n_days: usize,
    pub strategies: Vec<StrategyResult>,
}

impl BacktestResult {
    pub fn get(&self, kind: StrategyKind) -> Option<&StrategyResult> {
        self.strategies.iter().find(|s| s.kind == kind)
    }

    pub fn n_evaluated(&self) -> usize {
        self.n_days - self.eval_start
    }
}

fn build_strategy(
    kind: StrategyKind,
    config: &BacktestConfig,
    relatives: RelativesView<'_>,
    eval_start: usize,
) -> Result<Box<dyn Strategy>> {
    let m = relatives.n_assets();
    Ok(match kind {
        StrategyKind::Amak => Box::new(AmakStrategy {
            inner: Amak::new(&config.amak, m)?,
            n_assets: m,
        }),
        StrategyKind::CornK => Box::new(CornKStrategy {
            inner: SubAgent::new(config.corn_k, m)?,
            warmup: config.own_warmup(kind),
            n_assets: m,
        }),
        StrategyKind::Ubah => Box::new(UbahStrategy { held: Vec::new() }),
        StrategyKind::Crp => Box::new(FixedStrategy(match &config.crp_weights {
            Some(w) => {
                let p = Portfolio::new(w.clone())?;
                if p.len() != m {
                    return Err(Error::DimensionMismatch {
                        expected: m,
                        found: p.len(),
                    });
                }
                p
            }
            None => uniform_portfolio(m)?,
        })),
        // Hindsight: the best asset over the evaluated span.
        StrategyKind::BestStock => {
            let span = relatives.flat_rows(eval_start..relatives.n_days());
            let tail = PriceRelativeMatrix::from_flat(span.to_vec(), m)?;
            Box::new(FixedStrategy(Portfolio::vertex(
                m,
                best_asset(tail.view())?,
            )))
        }
        StrategyKind::Eg => Box::new(EgStrategy {
            eta: config.eg.eta,
            current: None,
        }),
    })
}

fn run_strategy(
    kind: StrategyKind,
    config: &BacktestConfig,
    relatives: RelativesView<'_>,
    eval_start: usize,
) -> Result<StrategyResult> {
    let mut strategy = build_strategy(kind, config, relatives, eval_start)?;
    let n = relatives.n_days();
    let mut trajectory = WealthTrajectory::new();
    let mut portfolios = Vec::with_capacity(n - eval_start);
    for t in strategy.first_step(eval_start)..n {
        let b = strategy.decide(t, relatives.prefix(t))?;
        if t >= eval_start {
            trajectory.step(&b, relatives.row(t))?;
            portfolios.push(b);
        }
    }
    let metrics = MetricReport::from_trajectory(&trajectory, config.asr_mode)?;
    Ok(StrategyResult {
        kind,
        trajectory,
        metrics,
        portfolios,
        events: strategy.events(),
    })
}

/// Runs every selected strategy over the same evaluated span.
pub fn run_backtest(
    config: &BacktestConfig,
    relatives: &PriceRelativeMatrix,
) -> Result<BacktestResult> {
    config.validate()?;
    let view = relatives.view();
    let n = view.n_days();
    let eval_start = config.eval_start();
    if eval_start >= n {
        return Err(Error::NotEnoughData(format!(
            "warm-up needs {eval_start} days plus at least one evaluated day, but only {n} days of relatives are available"
        )));
    }
    let strategies = config
        .strategies
        .iter()
        .map(|&kind| run_strategy(kind, config, view, eval_start))
        .collect::<Result<Vec<_>>>()?;
    Ok(BacktestResult {
        eval_start,
        n_days: n,
        strategies,
    })
}

/// Parameters that take over from relatives day `start` on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Regime {
    pub start: usize,
    /// Per-asset log drift; one value is broadcast to every asset.
    pub drift: Vec<f64>,
    /// Per-asset log volatility; one value is broadcast to every asset.
    pub volatility: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SyntheticSpec {
    /// Price rows, so `n_days - 1` relatives.
    pub n_days: usize,
    pub m_assets: usize,
    /// Per-asset log drift; one value is broadcast to every asset.
    pub drift: Vec<f64>,
    /// Per-asset log volatility; one value is broadcast to every asset.
    pub volatility: Vec<f64>,
    /// Sorted by `start`.
    pub regimes: Vec<Regime>,
    pub initial_price: f64,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_days: 600,
            m_assets: 5,
            drift: vec![0.0003],
            volatility: vec![0.015],
            regimes: Vec::new(),
            initial_price: 100.0,
            seed: 0,
        }
    }
}

fn broadcast(values: &[f64], m: usize, what: &str) -> Result<Vec<f64>> {
    match values.len() {
        1 => Ok(vec![values[0]; m]),
        n if n == m => Ok(values.to_vec()),
        n => Err(Error::Config(format!(
            "{what} has {n} values for {m} assets"
        ))),
    }
}

fn check_params(drift: &[f64], vol: &[f64]) -> Result<()> {
    if drift.iter().any(|d| !d.is_finite()) {
        return Err(Error::Config("drift must be finite".into()));
    }
    if vol.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
        return Err(Error::Config(
            "volatility must be finite and non-negative".into(),
        ));
    }
    Ok(())
}

impl SyntheticSpec {
    /// Per-relatives-day `(drift, volatility)` vectors.
    fn schedule(&self) -> Result<Vec<(Vec<f64>, Vec<f64>)>> {
        if self.n_days < 2 {
            return Err(Error::Config("synthetic n_days must be at least 2".into()));
        }
        if self.m_assets < 2 {
            return Err(Error::Config(
                "synthetic m_assets must be at least 2".into(),
            ));
        }
        if !(self.initial_price > 0.0 && self.initial_price.is_finite()) {
            return Err(Error::Config("initial price must be positive".into()));
        }
        let m = self.m_assets;
        let mut phases = vec![(
            0,
            broadcast(&self.drift, m, "drift")?,
            broadcast(&self.volatility, m, "volatility")?,
        )];
        let mut previous: Option<usize> = None;
        for r in &self.regimes {
            if previous.is_some_and(|p| r.start <= p) {
                return Err(Error::Config(format!(
                    "regime starting at {} is out of order",
                    r.start
                )));
            }
            previous = Some(r.start);
            let phase = (
                r.start,
                broadcast(&r.drift, m, "regime drift")?,
                broadcast(&r.volatility, m, "regime volatility")?,
            );
            if r.start == 0 {
                phases[0] = phase;
            } else {
                phases.push(phase);
            }
        }
        let mut out = Vec::with_capacity(self.n_days - 1);
        let mut k = 0;
        for t in 0..self.n_days - 1 {
            while k + 1 < phases.len() && phases[k + 1].0 <= t {
                k += 1;
            }
            out.push((phases[k].1.clone(), phases[k].2.clone()));
        }
        for (d, v) in phases.iter().map(|p| (&p.1, &p.2)) {
            check_params(d, v)?;
        }
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule().map(|_| ())
    }
}

/// Weekdays from 2000-01-03.
fn trading_dates(n: usize) -> Vec<NaiveDate> {
    let mut d = NaiveDate::from_ymd_opt(2000, 1, 3).expect("valid date");
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d = d + Days::new(1);
    }
    out
}

/// Seeded geometric random walk, `p[t+1] = p[t] exp(drift + vol z)`.
///
/// Prices are rounded to 12 significant digits on output so the series
/// survives a CSV round trip exactly; the walk itself is not rounded.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<PriceSeries> {
    let schedule = spec.schedule()?;
    let m = spec.m_assets;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut level = vec![spec.initial_price.ln(); m];
    let mut prices = Vec::with_capacity(spec.n_days * m);
    prices.extend(level.iter().map(|l| round_significant(l.exp(), 12)));
    for (drift, vol) in &schedule {
        for j in 0..m {
            let z: f64 = StandardNormal.sample(&mut rng);
            level[j] += drift[j] + vol[j] * z;
        }
        prices.extend(level.iter().map(|l| round_significant(l.exp(), 12)));
    }
    let names = (1..=m).map(|j| format!("A{j}")).collect();
    PriceSeries::new(trading_dates(spec.n_days), names, prices)
}
