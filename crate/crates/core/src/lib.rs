//! Online portfolio selection by multi-horizon pattern matching.
//!
//! The crate provides the building blocks and a deterministic backtest engine:
//!
//! * [`market_data`]: CSV ingestion, price relatives, market-vector features.
//! * [`portfolio`]: simplex portfolios and wealth accounting.
//! * [`clustering`]: Manhattan online K-means and the centroid lifecycle.
//! * [`experts`]: correlation/cluster similar days and the growth-optimal solver.
//! * [`agents`]: memory-limited sub-agents, top-K combination, multi-horizon merge.
//! * [`baselines`]: UBAH, CRP, Best Stock and exponentiated gradient.
//! * [`metrics`]: maximum drawdown, annualised yield and Sharpe ratio.
//! * [`backtest`]: the engine and the synthetic market generator.

pub mod agents;
pub mod backtest;
pub mod baselines;
pub mod clustering;
pub mod error;
pub mod experts;
pub mod market_data;
pub mod metrics;
pub mod portfolio;

pub use agents::{Amak, AmakConfig, Memory, SubAgent, SubAgentConfig};
pub use backtest::{
    generate_synthetic, run_backtest, BacktestConfig, BacktestResult, Regime, StrategyKind,
    StrategyResult, SyntheticSpec,
};
pub use baselines::EgConfig;
pub use clustering::{ClusterLifecycleConfig, ClusterModel, KmuParams, LifecycleEvent};
pub use error::{Error, Result};
pub use experts::{ExpertSpec, ExpertState, SimilarDaySet, SimilaritySource};
pub use market_data::{
    compute_relatives, load_prices, MarketVector, PriceRelativeMatrix, PriceSeries, RelativesView,
};
pub use metrics::{AsrMode, MetricReport};
pub use portfolio::{Portfolio, WealthTrajectory};
