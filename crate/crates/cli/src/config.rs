//! TOML run configuration. Every key is optional; an empty file selects the defaults.

use amak_core::backtest::{BacktestConfig, StrategyKind, CORN_K_WARMUP};
use amak_core::{AmakConfig, AsrMode, EgConfig, KmuParams, SubAgentConfig};
use anyhow::{Context, Result};
use serde::Deserialize;
use std::path::Path;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FileConfig {
    pub strategies: Option<Vec<StrategyKind>>,
    pub warmup_days: Option<usize>,
    pub seed: Option<u64>,
    pub asr_mode: Option<AsrMode>,
    pub amak: AmakSection,
    pub corn_k: CornKSection,
    pub eg: EgSection,
    pub crp: CrpSection,
    pub clustering: ClusteringSection,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmakSection {
    pub horizons: Vec<usize>,
    pub max_window: usize,
    pub thresholds: usize,
    pub top_k: usize,
    pub fallback: bool,
    pub parallel: bool,
}

impl Default for AmakSection {
    fn default() -> Self {
        let d = SubAgentConfig::with_memory(10);
        Self {
            horizons: vec![10, 120, 190],
            max_window: d.max_window,
            thresholds: d.thresholds,
            top_k: d.top_k,
            fallback: d.fallback,
            parallel: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CornKSection {
    pub warmup: usize,
    pub max_window: usize,
    pub thresholds: usize,
    pub top_k: usize,
}

impl Default for CornKSection {
    fn default() -> Self {
        let c = SubAgentConfig::corn_k();
        Self {
            warmup: CORN_K_WARMUP,
            max_window: c.max_window,
            thresholds: c.thresholds,
            top_k: c.top_k,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EgSection {
    pub eta: f64,
}

impl Default for EgSection {
    fn default() -> Self {
        Self {
            eta: EgConfig::default().eta,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrpSection {
    pub weights: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusteringSection {
    pub epsilon: f64,
    pub max_attempts: usize,
    pub max_passes: usize,
}

impl Default for ClusteringSection {
    fn default() -> Self {
        let k = KmuParams::default();
        Self {
            epsilon: k.epsilon,
            max_attempts: k.max_attempts,
            max_passes: k.max_passes,
        }
    }
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    /// Builds the engine configuration; `seed` and `strategies` override the file.
    pub fn to_backtest(
        &self,
        seed: Option<u64>,
        strategies: Option<Vec<StrategyKind>>,
    ) -> BacktestConfig {
        let kmu = KmuParams {
            epsilon: self.clustering.epsilon,
            max_attempts: self.clustering.max_attempts,
            max_passes: self.clustering.max_passes,
        };
        let a = &self.amak;
        let mut amak = AmakConfig::with_horizons(&a.horizons, 0).map_horizons(|h| {
            h.max_window = a.max_window;
            h.thresholds = a.thresholds;
            h.top_k = a.top_k;
            h.fallback = a.fallback;
            h.kmu = kmu;
        });
        amak.parallel = a.parallel;

        let c = &self.corn_k;
        let corn_k = SubAgentConfig {
            max_window: c.max_window,
            thresholds: c.thresholds,
            top_k: c.top_k,
            kmu,
            ..SubAgentConfig::corn_k()
        };

        let mut config = BacktestConfig {
            strategies: strategies
                .or_else(|| self.strategies.clone())
                .unwrap_or_else(|| StrategyKind::ALL.to_vec()),
            warmup_days: self.warmup_days,
            amak,
            corn_k,
            corn_k_warmup: c.warmup,
            eg: EgConfig { eta: self.eg.eta },
            crp_weights: self.crp.weights.clone(),
            seed: 0,
            asr_mode: self.asr_mode.unwrap_or_default(),
        };
        config.reseed(seed.or(self.seed).unwrap_or(0));
        config
    }
}

/// Parses a comma-separated strategy list.
pub fn parse_strategies(list: &str) -> Result<Vec<StrategyKind>> {
    list.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| s.parse::<StrategyKind>().map_err(Into::into))
        .collect()
}
