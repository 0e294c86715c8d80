//! Sub-agents and the multi-horizon merge.
//!
//! A sub-agent owns one expert per `(w, rho)` pair and, when the cluster
//! fallback is on, one cluster model per window size. With a memory of `d`
//! days it sees only the rows from `memory_start` on: the span grows by one
//! row per day and is cut back to the latest `d` rows whenever the decision
//! day is a multiple of `d`, so its length cycles through `d ..= 2d - 1` and
//! every cluster reset (multiples of `2d`) coincides with a cut.

use rayon::prelude::*;
use serde::Serialize;

use crate::clustering::{ClusterLifecycle, ClusterLifecycleConfig, KmuParams, LifecycleEvent};
use crate::error::{Error, Result};
use crate::experts::{
    expert_grid, expert_step, ExpertState, SelectionCache, SimilaritySource, StepContext,
};
use crate::market_data::RelativesView;
use crate::portfolio::{merge_portfolios, Portfolio};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Memory {
    /// Keep between `d` and `2d - 1` rows.
    Days(usize),
    /// See the full history.
    Unbounded,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubAgentConfig {
    pub memory: Memory,
    /// Largest window size `W`.
    pub max_window: usize,
    /// Threshold count `P`; thresholds are `1/P .. (P-1)/P`.
    pub thresholds: usize,
    /// Number of wealthiest experts combined.
    pub top_k: usize,
    /// Use cluster-similar days when an expert with `w > 2` finds no correlated days.
    pub fallback: bool,
    pub kmu: KmuParams,
    pub seed: u64,
}

impl SubAgentConfig {
    /// Memory-limited agent with the cluster fallback.
    pub fn with_memory(d: usize) -> Self {
        Self {
            memory: Memory::Days(d),
            max_window: 5,
            thresholds: 10,
            top_k: 5,
            fallback: true,
            kmu: KmuParams::default(),
            seed: 0,
        }
    }

    /// Full-history agent without fallback (plain CORN-K).
    pub fn corn_k() -> Self {
        Self {
            memory: Memory::Unbounded,
            fallback: false,
            ..Self::with_memory(1)
        }
    }

    pub fn n_experts(&self) -> usize {
        self.max_window * self.thresholds.saturating_sub(1)
    }

    /// Earliest decision day: the agent needs `d` rows of memory.
    pub fn warmup(&self) -> usize {
        match self.memory {
            Memory::Days(d) => d,
            Memory::Unbounded => self.max_window,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_window == 0 {
            return Err(Error::Config("max window size must be at least 1".into()));
        }
        if self.thresholds < 2 {
            return Err(Error::Config("threshold count P must be at least 2".into()));
        }
        if self.top_k == 0 || self.top_k > self.n_experts() {
            return Err(Error::Config(format!(
                "top_k = {} must lie in 1..={}",
                self.top_k,
                self.n_experts()
            )));
        }
        match self.memory {
            Memory::Days(d) if d <= self.max_window => Err(Error::Config(format!(
                "memory d = {d} must exceed the max window size {}",
                self.max_window
            ))),
            Memory::Unbounded if self.fallback => Err(Error::Config(
                "the cluster fallback needs a finite memory".into(),
            )),
            _ => self.kmu.validate(),
        }
    }
}

/// Tally of where expert portfolios came from, per window size.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SourceCounts {
    /// Indexed by `w - 1`: `[correlation, cluster, uniform]`.
    pub by_window: Vec<[u64; 3]>,
}

impl SourceCounts {
    fn record(&mut self, w: usize, source: SimilaritySource) {
        if self.by_window.len() < w {
            self.by_window.resize(w, [0; 3]);
        }
        let slot = match source {
            SimilaritySource::Correlation => 0,
            SimilaritySource::Cluster => 1,
            SimilaritySource::Empty => 2,
        };
        self.by_window[w - 1][slot] += 1;
    }
}

#[derive(Debug, Clone)]
pub struct SubAgent {
    config: SubAgentConfig,
    n_assets: usize,
    experts: Vec<ExpertState>,
    clusters: Option<ClusterLifecycle>,
    memory_start: usize,
    last_t: Option<usize>,
    portfolio: Option<Portfolio>,
    sources: SourceCounts,
}

impl SubAgent {
    pub fn new(config: SubAgentConfig, n_assets: usize) -> Result<Self> {
        config.validate()?;
        if n_assets == 0 {
            return Err(Error::Empty("no assets"));
        }
        let experts = expert_grid(config.max_window, config.thresholds)
            .into_iter()
            .map(ExpertState::new)
            .collect();
        Ok(Self {
            config,
            n_assets,
            experts,
            clusters: None,
            memory_start: 0,
            last_t: None,
            portfolio: None,
            sources: SourceCounts::default(),
        })
    }

    pub fn config(&self) -> &SubAgentConfig {
        &self.config
    }

    pub fn experts(&self) -> &[ExpertState] {
        &self.experts
    }

    pub fn clusters(&self) -> Option<&ClusterLifecycle> {
        self.clusters.as_ref()
    }

    pub fn events(&self) -> &[LifecycleEvent] {
        self.clusters.as_ref().map_or(&[], |c| c.events())
    }

    pub fn source_counts(&self) -> &SourceCounts {
        &self.sources
    }

    /// Rows visible after the latest step.
    pub fn memory(&self) -> std::ops::Range<usize> {
        self.memory_start..self.last_t.unwrap_or(self.memory_start)
    }

    pub fn portfolio(&self) -> Option<&Portfolio> {
        self.portfolio.as_ref()
    }

    /// Decides the portfolio for day `t` from rows `0..t`.
    ///
    /// The first call starts the agent; later calls must advance `t` by one.
    pub fn step(&mut self, t: usize, history: RelativesView<'_>) -> Result<Portfolio> {
        if history.n_days() < t {
            return Err(Error::NotEnoughData(format!(
                "decision day {t} needs {t} rows, found {}",
                history.n_days()
            )));
        }
        if history.n_assets() != self.n_assets {
            return Err(Error::DimensionMismatch {
                expected: self.n_assets,
                found: history.n_assets(),
            });
        }
        let history = history.prefix(t);

        match self.last_t {
            None => self.start(t, history)?,
            Some(prev) if t == prev + 1 => self.advance(t, history)?,
            Some(prev) => {
                return Err(Error::Config(format!(
                    "sub-agent stepped from day {prev} to day {t}; days must be consecutive"
                )))
            }
        }
        self.last_t = Some(t);

        let mut cache = SelectionCache::new();
        for expert in &mut self.experts {
            let ctx = StepContext {
                history,
                t,
                memory_start: self.memory_start,
                clusters: self.clusters.as_ref().and_then(|c| c.model(expert.spec.w)),
            };
            let source = expert_step(expert, &ctx, &mut cache)?;
            self.sources.record(expert.spec.w, source);
        }

        let p = top_k_combine(&self.experts, self.config.top_k)?;
        self.portfolio = Some(p.clone());
        Ok(p)
    }

    fn start(&mut self, t: usize, history: RelativesView<'_>) -> Result<()> {
        let warmup = self.config.warmup();
        if t < warmup {
            return Err(Error::NotEnoughData(format!(
                "sub-agent needs {warmup} rows before its first decision, found {t}"
            )));
        }
        if let Memory::Days(d) = self.config.memory {
            self.memory_start = t - d;
            if self.config.fallback {
                let config = ClusterLifecycleConfig {
                    d,
                    max_window: self.config.max_window,
                    params: self.config.kmu,
                    seed: self.config.seed,
                };
                self.clusters = Some(ClusterLifecycle::init(config, t, history)?);
            }
        }
        Ok(())
    }

    fn advance(&mut self, t: usize, history: RelativesView<'_>) -> Result<()> {
        if let Memory::Days(d) = self.config.memory {
            if t.is_multiple_of(d) && t - self.memory_start > d {
                self.memory_start = t - d;
            }
        }
        if let Some(clusters) = self.clusters.as_mut() {
            clusters.step(t, history, self.memory_start)?;
        }
        Ok(())
    }
}

/// Mean portfolio of the `k` wealthiest experts; ties favour smaller `w`, then smaller `rho`.
pub fn top_k_combine(experts: &[ExpertState], k: usize) -> Result<Portfolio> {
    if k == 0 || experts.len() < k {
        return Err(Error::Config(format!(
            "cannot combine the top {k} of {} experts",
            experts.len()
        )));
    }
    let mut ranked: Vec<&ExpertState> = experts.iter().collect();
    ranked.sort_by(|a, b| {
        b.wealth
            .total_cmp(&a.wealth)
            .then(a.spec.w.cmp(&b.spec.w))
            .then(a.spec.rho.total_cmp(&b.spec.rho))
    });
    let chosen = ranked[..k]
        .iter()
        .map(|e| {
            e.portfolio
                .clone()
                .ok_or(Error::Empty("expert has not selected a portfolio yet"))
        })
        .collect::<Result<Vec<_>>>()?;
    merge_portfolios(&chosen)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmakConfig {
    pub horizons: Vec<SubAgentConfig>,
    /// Step sub-agents on the rayon pool; results are identical either way.
    pub parallel: bool,
}

impl Default for AmakConfig {
    fn default() -> Self {
        Self::with_horizons(&[10, 120, 190], 0)
    }
}

impl AmakConfig {
    /// Default sub-agents for each memory length, with per-horizon seeds derived from `seed`.
    pub fn with_horizons(days: &[usize], seed: u64) -> Self {
        let horizons = days
            .iter()
            .map(|&d| SubAgentConfig {
                seed: horizon_seed(seed, d),
                ..SubAgentConfig::with_memory(d)
            })
            .collect();
        Self {
            horizons,
            parallel: false,
        }
    }

    /// Applies `f` to every horizon.
    pub fn map_horizons(mut self, f: impl Fn(&mut SubAgentConfig)) -> Self {
        self.horizons.iter_mut().for_each(f);
        self
    }

    pub fn warmup(&self) -> usize {
        self.horizons
            .iter()
            .map(SubAgentConfig::warmup)
            .max()
            .unwrap_or(0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizons.is_empty() {
            return Err(Error::Config("at least one horizon is required".into()));
        }
        for (i, h) in self.horizons.iter().enumerate() {
            h.validate()?;
            if self.horizons[..i].iter().any(|o| o.memory == h.memory) {
                return Err(Error::Config(format!("duplicate horizon {:?}", h.memory)));
            }
        }
        Ok(())
    }
}

pub(crate) fn horizon_seed(seed: u64, d: usize) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ (d as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Equal-weight merge of several sub-agents with different memories.
#[derive(Debug, Clone)]
pub struct Amak {
    agents: Vec<SubAgent>,
    parallel: bool,
}

impl Amak {
    pub fn new(config: &AmakConfig, n_assets: usize) -> Result<Self> {
        config.validate()?;
        let agents = config
            .horizons
            .iter()
            .map(|h| SubAgent::new(*h, n_assets))
            .collect::<Result<_>>()?;
        Ok(Self {
            agents,
            parallel: config.parallel,
        })
    }

    pub fn agents(&self) -> &[SubAgent] {
        &self.agents
    }

    pub fn warmup(&self) -> usize {
        self.agents
            .iter()
            .map(|a| a.config().warmup())
            .max()
            .unwrap_or(0)
    }

    pub fn step(&mut self, t: usize, history: RelativesView<'_>) -> Result<Portfolio> {
        amak_step(&mut self.agents, t, history, self.parallel)
    }

    pub fn events(&self) -> Vec<LifecycleEvent> {
        self.agents
            .iter()
            .flat_map(|a| a.events().iter().copied())
            .collect()
    }
}

/// Steps every sub-agent and averages their portfolios in horizon order.
pub fn amak_step(
    agents: &mut [SubAgent],
    t: usize,
    history: RelativesView<'_>,
    parallel: bool,
) -> Result<Portfolio> {
    if agents.is_empty() {
        return Err(Error::Empty("no sub-agents"));
    }
    let portfolios: Vec<Portfolio> = if parallel {
        agents
            .par_iter_mut()
            .map(|a| a.step(t, history))
            .collect::<Result<_>>()?
    } else {
        agents
            .iter_mut()
            .map(|a| a.step(t, history))
            .collect::<Result<_>>()?
    };
    merge_portfolios(&portfolios)
}
