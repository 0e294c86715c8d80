//! Simplex portfolios and wealth accounting.

use serde::Serialize;

use crate::error::{Error, Result};

/// Weights sum to one within this tolerance without renormalisation.
pub const SUM_TOLERANCE: f64 = 1e-9;
/// Sums within this band are renormalised; anything further off is rejected.
pub const RENORMALISE_BAND: f64 = 1e-6;

/// A point on the probability simplex: long-only, fully invested.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Portfolio(Vec<f64>);

impl Portfolio {
    pub fn new(mut weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidPortfolio("no assets".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(**w >= 0.0 && w.is_finite())) {
            return Err(Error::InvalidPortfolio(format!(
                "weight {w} is negative or not finite"
            )));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > RENORMALISE_BAND {
            return Err(Error::InvalidPortfolio(format!("weights sum to {sum}")));
        }
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            weights.iter_mut().for_each(|w| *w /= sum);
        }
        Ok(Self(weights))
    }

    /// Builds a portfolio from non-negative scores by dividing by their sum.
    pub(crate) fn from_scores(mut scores: Vec<f64>) -> Self {
        let sum: f64 = scores.iter().sum();
        debug_assert!(sum > 0.0);
        scores.iter_mut().for_each(|w| *w /= sum);
        Self(scores)
    }

    pub fn uniform(m: usize) -> Result<Self> {
        uniform_portfolio(m)
    }

    /// All weight on asset `j`.
    pub fn vertex(m: usize, j: usize) -> Self {
        let mut w = vec![0.0; m];
        w[j] = 1.0;
        Self(w)
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Gross portfolio return `b . x`.
    pub fn gross_return(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.0.len() {
            return Err(Error::DimensionMismatch {
                expected: self.0.len(),
                found: x.len(),
            });
        }
        Ok(dot(&self.0, x))
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn uniform_portfolio(m: usize) -> Result<Portfolio> {
    if m == 0 {
        return Err(Error::InvalidPortfolio("no assets".into()));
    }
    Ok(Portfolio(vec![1.0 / m as f64; m]))
}

/// `S * (b . x)`.
pub fn wealth_step(wealth: f64, b: &Portfolio, x: &[f64]) -> Result<f64> {
    Ok(wealth * b.gross_return(x)?)
}

/// Component-wise mean.
pub fn merge_portfolios(ports: &[Portfolio]) -> Result<Portfolio> {
    let first = ports
        .first()
        .ok_or(Error::Empty("no portfolios to merge"))?;
    let m = first.len();
    let mut acc = vec![0.0; m];
    for p in ports {
        if p.len() != m {
            return Err(Error::DimensionMismatch {
                expected: m,
                found: p.len(),
            });
        }
        acc.iter_mut().zip(p.weights()).for_each(|(a, w)| *a += w);
    }
    let k = ports.len() as f64;
    acc.iter_mut().for_each(|a| *a /= k);
    Portfolio::new(acc)
}

/// Wealth path `S_0 .. S_n`, starting from `S_0 = 1` unless built otherwise.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct WealthTrajectory(Vec<f64>);

impl Default for WealthTrajectory {
    fn default() -> Self {
        Self::new()
    }
}

impl WealthTrajectory {
    pub fn new() -> Self {
        Self(vec![1.0])
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("wealth trajectory"));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
            return Err(Error::Config(format!(
                "wealth {v} is not strictly positive"
            )));
        }
        Ok(Self(values))
    }

    /// Appends `S_last * (b . x)` and returns it.
    pub fn step(&mut self, b: &Portfolio, x: &[f64]) -> Result<f64> {
        let next = wealth_step(self.terminal(), b, x)?;
        self.0.push(next);
        Ok(next)
    }

    pub(crate) fn push(&mut self, value: f64) {
        self.0.push(value);
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn terminal(&self) -> f64 {
        *self.0.last().expect("trajectory is never empty")
    }

    pub fn initial(&self) -> f64 {
        self.0[0]
    }

    /// Number of recorded periods (values minus one).
    pub fn n_periods(&self) -> usize {
        self.0.len() - 1
    }

    /// Simple daily returns `S_{t+1} / S_t - 1`.
    pub fn daily_returns(&self) -> Vec<f64> {
        self.0.windows(2).map(|w| w[1] / w[0] - 1.0).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(w: &[f64]) -> Portfolio {
        Portfolio::new(w.to_vec()).unwrap()
    }

    #[test]
    fn uniform_examples() {
        assert_eq!(uniform_portfolio(4).unwrap().weights(), [0.25; 4]);
        assert_eq!(uniform_portfolio(1).unwrap().weights(), [1.0]);
        assert_eq!(uniform_portfolio(3).unwrap().weights(), [1.0 / 3.0; 3]);
        assert!(uniform_portfolio(0).is_err());
    }

    #[test]
    fn wealth_step_examples() {
        assert!((wealth_step(1.0, &p(&[0.5, 0.5]), &[1.1, 0.9]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(wealth_step(2.0, &p(&[1.0, 0.0]), &[1.5, 0.7]).unwrap(), 3.0);
        assert_eq!(
            wealth_step(1.0, &uniform_portfolio(2).unwrap(), &[1.0, 1.0]).unwrap(),
            1.0
        );
        assert!(matches!(
            wealth_step(1.0, &p(&[1.0, 0.0]), &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn merge_examples() {
        let m = merge_portfolios(&[p(&[1.0, 0.0]), p(&[0.0, 1.0])]).unwrap();
        assert_eq!(m.weights(), [0.5, 0.5]);
        let m = merge_portfolios(&[p(&[0.5, 0.5])]).unwrap();
        assert_eq!(m.weights(), [0.5, 0.5]);
        let m = merge_portfolios(&[p(&[1.0, 0.0]), p(&[1.0, 0.0]), p(&[0.0, 1.0])]).unwrap();
        assert!((m.weights()[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((m.weights()[1] - 1.0 / 3.0).abs() < 1e-15);
        assert!(merge_portfolios(&[]).is_err());
        assert!(merge_portfolios(&[p(&[1.0]), p(&[0.5, 0.5])]).is_err());
    }

    #[test]
    fn renormalises_small_drift_only() {
        let q = Portfolio::new(vec![0.5, 0.5 + 5e-7]).unwrap();
        assert!((q.weights().iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(Portfolio::new(vec![0.5, 0.6]).is_err());
        assert!(Portfolio::new(vec![1.5, -0.5]).is_err());
        assert!(Portfolio::new(vec![]).is_err());
    }

    #[test]
    fn flat_market_keeps_wealth() {
        let mut traj = WealthTrajectory::new();
        let b = uniform_portfolio(3).unwrap();
        for _ in 0..10 {
            traj.step(&b, &[1.0, 1.0, 1.0]).unwrap();
        }
        assert!(traj.values().iter().all(|&v| v == 1.0));
        assert_eq!(traj.n_periods(), 10);
    }
}
