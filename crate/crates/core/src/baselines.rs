//! Reference strategies as closed-form wealth trajectories, plus the
//! exponentiated-gradient update.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::market_data::RelativesView;
use crate::portfolio::{dot, uniform_portfolio, Portfolio, WealthTrajectory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EgConfig {
    /// Learning rate.
    pub eta: f64,
}

impl Default for EgConfig {
    fn default() -> Self {
        Self { eta: 0.05 }
    }
}

impl EgConfig {
    pub fn validate(&self) -> Result<()> {
        if self.eta > 0.0 && self.eta.is_finite() {
            Ok(())
        } else {
            Err(Error::Config(format!(
                "EG learning rate {} must be positive",
                self.eta
            )))
        }
    }
}

fn require_days(relatives: RelativesView<'_>) -> Result<()> {
    if relatives.n_days() == 0 {
        return Err(Error::NotEnoughData(
            "baseline needs at least one day".into(),
        ));
    }
    Ok(())
}

/// Per-asset cumulative products after each day, row-major (`n_days * m`).
fn cumulative_products(relatives: RelativesView<'_>) -> Vec<Vec<f64>> {
    let mut acc = vec![1.0; relatives.n_assets()];
    (0..relatives.n_days())
        .map(|t| {
            acc.iter_mut()
                .zip(relatives.row(t))
                .for_each(|(a, x)| *a *= x);
            acc.clone()
        })
        .collect()
}

/// Uniform buy-and-hold: `S_t = mean_j prod_{k < t} x_kj`.
pub fn ubah_trajectory(relatives: RelativesView<'_>) -> Result<WealthTrajectory> {
    require_days(relatives)?;
    let m = relatives.n_assets() as f64;
    let mut traj = WealthTrajectory::new();
    for cum in cumulative_products(relatives) {
        traj.push(cum.iter().sum::<f64>() / m);
    }
    Ok(traj)
}

/// Uniform constant rebalanced portfolio.
pub fn crp_trajectory(relatives: RelativesView<'_>) -> Result<WealthTrajectory> {
    crp_trajectory_with(relatives, &uniform_portfolio(relatives.n_assets())?)
}

/// Constant rebalanced portfolio with fixed `weights`.
pub fn crp_trajectory_with(
    relatives: RelativesView<'_>,
    weights: &Portfolio,
) -> Result<WealthTrajectory> {
    require_days(relatives)?;
    let mut traj = WealthTrajectory::new();
    for t in 0..relatives.n_days() {
        traj.step(weights, relatives.row(t))?;
    }
    Ok(traj)
}

/// Index of the asset with the largest total growth over `relatives`; ties go to the lower index.
pub fn best_asset(relatives: RelativesView<'_>) -> Result<usize> {
    require_days(relatives)?;
    let last = cumulative_products(relatives)
        .pop()
        .expect("at least one day");
    let mut best = 0;
    for (j, &v) in last.iter().enumerate() {
        if v > last[best] {
            best = j;
        }
    }
    Ok(best)
}

/// Hindsight single best asset, held throughout.
pub fn best_stock_trajectory(relatives: RelativesView<'_>) -> Result<WealthTrajectory> {
    let j = best_asset(relatives)?;
    let mut traj = WealthTrajectory::new();
    for cum in cumulative_products(relatives) {
        traj.push(cum[j]);
    }
    Ok(traj)
}

/// Multiplicative update `b'_j ∝ b_j exp(eta x_j / (b . x))`.
pub fn eg_step(b: &Portfolio, x: &[f64], eta: f64) -> Result<Portfolio> {
    let gross = b.gross_return(x)?;
    let exps: Vec<f64> = x.iter().map(|xj| eta * xj / gross).collect();
    let top = exps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scores = b
        .weights()
        .iter()
        .zip(&exps)
        .map(|(w, e)| w * (e - top).exp())
        .collect();
    Ok(Portfolio::from_scores(scores))
}

/// Exponentiated gradient from the uniform portfolio.
pub fn eg_trajectory(relatives: RelativesView<'_>, config: &EgConfig) -> Result<WealthTrajectory> {
    require_days(relatives)?;
    config.validate()?;
    let mut b = uniform_portfolio(relatives.n_assets())?;
    let mut traj = WealthTrajectory::new();
    for t in 0..relatives.n_days() {
        let x = relatives.row(t);
        traj.step(&b, x)?;
        b = eg_step(&b, x, config.eta)?;
    }
    Ok(traj)
}

/// Buy-and-hold weights after the first `t` days of `relatives`, starting uniform.
pub fn ubah_weights(relatives: RelativesView<'_>, t: usize) -> Result<Portfolio> {
    let m = relatives.n_assets();
    if t == 0 {
        return uniform_portfolio(m);
    }
    let mut acc = vec![1.0; m];
    for k in 0..t {
        acc.iter_mut()
            .zip(relatives.row(k))
            .for_each(|(a, x)| *a *= x);
    }
    Ok(Portfolio::from_scores(acc))
}

pub(crate) fn gross(b: &[f64], x: &[f64]) -> f64 {
    dot(b, x)
}
