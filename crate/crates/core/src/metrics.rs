//! Maximum drawdown, annualised percentage yield and annualised Sharpe ratio.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::portfolio::WealthTrajectory;

pub const TRADING_DAYS_PER_YEAR: f64 = 252.0;
pub const RISK_FREE_RATE: f64 = 0.04;

/// How the Sharpe denominator is formed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AsrMode {
    /// `(apy - r_f) / sqrt(252)`.
    #[default]
    Constant,
    /// `(apy - r_f) / (std(daily returns) * sqrt(252))`.
    RealizedVol,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricReport {
    /// Largest relative decline from a running peak, as a non-positive fraction.
    pub mdd: f64,
    pub apy: f64,
    pub asr: f64,
    pub n_days: usize,
    pub years: f64,
}

impl MetricReport {
    pub fn from_trajectory(trajectory: &WealthTrajectory, mode: AsrMode) -> Result<Self> {
        let apy_value = apy(trajectory)?;
        let returns = trajectory.daily_returns();
        let asr_value = asr(apy_value, mode, Some(&returns))?;
        let n_days = trajectory.n_periods();
        Ok(Self {
            mdd: mdd(trajectory),
            apy: apy_value,
            asr: asr_value,
            n_days,
            years: n_days as f64 / TRADING_DAYS_PER_YEAR,
        })
    }
}

/// Single pass over the running peak.
pub fn mdd(trajectory: &WealthTrajectory) -> f64 {
    let mut peak = f64::NEG_INFINITY;
    let mut worst: f64 = 0.0;
    for &s in trajectory.values() {
        peak = peak.max(s);
        worst = worst.min((s - peak) / peak);
    }
    worst
}

/// `(S_n / S_0)^(1/y) - 1` with `y = n_days / 252`.
pub fn apy(trajectory: &WealthTrajectory) -> Result<f64> {
    let n_days = trajectory.n_periods();
    if n_days == 0 {
        return Err(Error::NotEnoughData(
            "APY needs at least two wealth values".into(),
        ));
    }
    let years = n_days as f64 / TRADING_DAYS_PER_YEAR;
    let growth = trajectory.terminal() / trajectory.initial();
    Ok(growth.powf(1.0 / years) - 1.0)
}

pub fn asr(apy_value: f64, mode: AsrMode, daily_returns: Option<&[f64]>) -> Result<f64> {
    let excess = apy_value - RISK_FREE_RATE;
    match mode {
        AsrMode::Constant => Ok(excess / TRADING_DAYS_PER_YEAR.sqrt()),
        AsrMode::RealizedVol => {
            let r = daily_returns.unwrap_or_default();
            if r.len() < 2 {
                return Err(Error::NotEnoughData(
                    "realised-volatility Sharpe needs at least two daily returns".into(),
                ));
            }
            let n = r.len() as f64;
            let mean = r.iter().sum::<f64>() / n;
            let sd = (r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            if excess == 0.0 {
                return Ok(0.0);
            }
            if sd == 0.0 {
                return Err(Error::ZeroVolatility);
            }
            Ok(excess / (sd * TRADING_DAYS_PER_YEAR.sqrt()))
        }
    }
}
