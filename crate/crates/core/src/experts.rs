//! Pattern-matching experts.
//!
//! An expert is parameterised by a window size `w` and a correlation
//! threshold `rho`. At decision day `t` (rows `0..t` known) it looks for
//! earlier days `i` whose preceding `w`-row window correlates with the latest
//! `w` rows at `rho` or more, then holds the portfolio that maximises the
//! growth it would have achieved on those days. When that set is empty it can
//! fall back to the days that share the latest window's cluster.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::clustering::ClusterModel;
use crate::error::{Error, Result};
use crate::market_data::RelativesView;
use crate::portfolio::{dot, uniform_portfolio, Portfolio};

/// Window size and correlation threshold of one expert.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ExpertSpec {
    pub w: usize,
    pub rho: f64,
}

impl ExpertSpec {
    pub fn new(w: usize, rho: f64) -> Result<Self> {
        if w == 0 {
            return Err(Error::Config(
                "expert window size must be at least 1".into(),
            ));
        }
        if !(rho > 0.0 && rho < 1.0) {
            return Err(Error::Config(format!(
                "correlation threshold {rho} must lie in (0, 1)"
            )));
        }
        Ok(Self { w, rho })
    }
}

/// Thresholds `1/P, 2/P, .., (P-1)/P`.
pub fn threshold_grid(p: usize) -> Vec<f64> {
    (1..p).map(|i| i as f64 / p as f64).collect()
}

/// All `(w, rho)` pairs, ordered by window then threshold.
pub fn expert_grid(max_window: usize, p: usize) -> Vec<ExpertSpec> {
    let rhos = threshold_grid(p);
    (1..=max_window)
        .flat_map(|w| rhos.iter().map(move |&rho| ExpertSpec { w, rho }))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpertState {
    pub spec: ExpertSpec,
    /// Cumulative wealth, starting at 1.
    pub wealth: f64,
    /// Portfolio chosen at the latest decision, not yet realised.
    pub portfolio: Option<Portfolio>,
}

impl ExpertState {
    pub fn new(spec: ExpertSpec) -> Self {
        Self {
            spec,
            wealth: 1.0,
            portfolio: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SimilaritySource {
    Correlation,
    Cluster,
    Empty,
}

/// Historical days whose outcome rows feed the growth-optimal search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimilarDaySet {
    pub days: Vec<usize>,
    pub source: SimilaritySource,
}

impl SimilarDaySet {
    fn new(days: Vec<usize>, source: SimilaritySource) -> Self {
        let source = if days.is_empty() {
            SimilaritySource::Empty
        } else {
            source
        };
        Self { days, source }
    }

    pub fn is_empty(&self) -> bool {
        self.days.is_empty()
    }
}

/// Pearson correlation; `None` when either side is (numerically) constant.
pub fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    if a.is_empty() {
        return None;
    }
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    let floor = |mean: f64| n * (1e-12 * mean.abs().max(1.0)).powi(2);
    if saa <= floor(ma) || sbb <= floor(mb) {
        return None;
    }
    Some(sab / (saa.sqrt() * sbb.sqrt()))
}

/// Correlation of each candidate day's preceding window with the latest one.
///
/// Candidates are days `i < t` whose window `i - w .. i` starts at or after
/// `memory_start`. Days with an undefined correlation are left out.
pub fn window_correlations(
    history: RelativesView<'_>,
    t: usize,
    w: usize,
    memory_start: usize,
) -> Vec<(usize, f64)> {
    if w == 0 || t > history.n_days() || t < memory_start + w {
        return Vec::new();
    }
    let current = history.flat_rows(t - w..t);
    (memory_start + w..t)
        .filter_map(|i| pearson(history.flat_rows(i - w..i), current).map(|c| (i, c)))
        .collect()
}

pub fn correlation_similar_set(
    history: RelativesView<'_>,
    t: usize,
    spec: &ExpertSpec,
    memory_start: usize,
) -> SimilarDaySet {
    let days = window_correlations(history, t, spec.w, memory_start)
        .into_iter()
        .filter(|&(_, c)| c >= spec.rho)
        .map(|(i, _)| i)
        .collect();
    SimilarDaySet::new(days, SimilaritySource::Correlation)
}

/// Days following the stored windows that share a cluster with the window
/// ending at row `t - 1`, excluding that window itself.
pub fn cluster_similar_set(model: &ClusterModel, t: usize) -> Result<SimilarDaySet> {
    let anchor = t.checked_sub(1).ok_or(Error::UnknownVector {
        day: 0,
        window: model.window_size(),
    })?;
    let k = model.assignment_of(anchor).ok_or(Error::UnknownVector {
        day: anchor,
        window: model.window_size(),
    })?;
    let days = model
        .members(k)
        .into_iter()
        .filter(|&d| d != anchor)
        .map(|d| d + 1)
        .collect();
    Ok(SimilarDaySet::new(days, SimilaritySource::Cluster))
}

/// Stopping rules of the growth-optimal solver.
#[derive(Debug, Clone, Copy)]
pub struct SolverOptions {
    /// Stop once the predicted objective gain of a Newton step falls below this.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 2000,
        }
    }
}

/// `sum_i log(b . x_i)`.
pub fn log_growth(b: &[f64], rows: &[&[f64]]) -> f64 {
    rows.iter().map(|x| dot(b, x).ln()).sum()
}

/// Maximises `prod_{i in days} (b . x_i)` over the simplex.
pub fn log_optimal_portfolio(
    history: RelativesView<'_>,
    days: &SimilarDaySet,
) -> Result<Portfolio> {
    if days.is_empty() {
        return Err(Error::Empty("similar-day set"));
    }
    let rows: Vec<&[f64]> = days.days.iter().map(|&i| history.row(i)).collect();
    log_optimal(&rows, &SolverOptions::default())
}

/// Active-set Newton ascent on `sum_i log(b . x_i)` from the uniform portfolio.
///
/// Each iteration takes a Newton step restricted to the current face of the
/// simplex (weights not pinned at zero), clipped at the boundary and
/// backtracked until the Armijo condition holds. A weight that reaches zero
/// leaves the face; once the face is optimal, the pinned weight with the
/// largest gradient above the multiplier is released.
pub fn log_optimal(rows: &[&[f64]], options: &SolverOptions) -> Result<Portfolio> {
    let m = rows.first().ok_or(Error::Empty("similar-day set"))?.len();
    if let Some(r) = rows.iter().find(|r| r.len() != m) {
        return Err(Error::DimensionMismatch {
            expected: m,
            found: r.len(),
        });
    }
    let mut b = uniform_portfolio(m)?.into_inner();
    if m == 1 {
        return Ok(Portfolio::from_scores(b));
    }

    let mut free = vec![true; m];
    let mut f = log_growth(&b, rows);
    let mut released: Option<usize> = None;
    let mut grad = vec![0.0; m];
    let mut hess = vec![0.0; m * m];

    for _ in 0..options.max_iterations {
        gradient_and_curvature(&b, rows, &mut grad, &mut hess);
        let active: Vec<usize> = (0..m).filter(|&j| free[j]).collect();
        let (d, decrement) = face_newton_direction(&active, &grad, &hess, m);

        if decrement <= 2.0 * options.tolerance {
            // Face optimum: release the most attractive pinned weight, if any.
            let multiplier = dot(&b, &grad);
            let candidate = (0..m)
                .filter(|&j| !free[j])
                .max_by(|&i, &j| grad[i].total_cmp(&grad[j]));
            match candidate {
                Some(j) if grad[j] > multiplier * (1.0 + 1e-12) && released != Some(j) => {
                    free[j] = true;
                    released = Some(j);
                    continue;
                }
                _ => break,
            }
        }

        let mut alpha_max = f64::INFINITY;
        let mut blocking = None;
        for j in 0..m {
            if d[j] < 0.0 {
                let ratio = b[j] / -d[j];
                if ratio < alpha_max {
                    alpha_max = ratio;
                    blocking = Some(j);
                }
            }
        }
        if alpha_max <= 0.0 {
            // A just-released weight wants to go negative: pin it again and stop.
            if let Some(j) = blocking {
                free[j] = false;
            }
            break;
        }

        let mut alpha = alpha_max.min(1.0);
        let mut candidate = vec![0.0; m];
        let accepted = loop {
            for j in 0..m {
                candidate[j] = (b[j] + alpha * d[j]).max(0.0);
            }
            let fc = log_growth(&candidate, rows);
            if fc >= f + 1e-4 * alpha * decrement {
                break Some(fc);
            }
            alpha *= 0.5;
            if alpha < 1e-16 {
                break None;
            }
        };
        let Some(fc) = accepted else { break };

        if alpha == alpha_max {
            if let Some(j) = blocking {
                candidate[j] = 0.0;
            }
        }
        let sum: f64 = candidate.iter().sum();
        for j in 0..m {
            candidate[j] /= sum;
            if candidate[j] <= 0.0 {
                candidate[j] = 0.0;
                free[j] = false;
            }
        }
        b.copy_from_slice(&candidate);
        f = fc.max(log_growth(&b, rows));
        released = None;
    }

    Ok(Portfolio::from_scores(b))
}

/// Gradient `g_j = sum_i x_ij / (b . x_i)` and curvature `Q = sum_i x_i x_i' / (b . x_i)^2`.
fn gradient_and_curvature(b: &[f64], rows: &[&[f64]], grad: &mut [f64], hess: &mut [f64]) {
    let m = b.len();
    grad.fill(0.0);
    hess.fill(0.0);
    for x in rows {
        let inv = 1.0 / dot(b, x);
        let inv2 = inv * inv;
        for j in 0..m {
            grad[j] += x[j] * inv;
            let xj = x[j] * inv2;
            for k in j..m {
                hess[j * m + k] += xj * x[k];
            }
        }
    }
    for j in 0..m {
        for k in 0..j {
            hess[j * m + k] = hess[k * m + j];
        }
    }
}

/// Newton direction on the face spanned by `active`, parameterised so that
/// the weights keep summing to one. Returns the direction and `g . d`.
fn face_newton_direction(
    active: &[usize],
    grad: &[f64],
    hess: &[f64],
    m: usize,
) -> (Vec<f64>, f64) {
    let mut d = vec![0.0; m];
    let k = active.len();
    if k < 2 {
        return (d, 0.0);
    }
    let last = active[k - 1];
    let n = k - 1;
    let q = |a: usize, b: usize| hess[a * m + b];
    let mut reduced = DMatrix::<f64>::zeros(n, n);
    let mut rhs = DVector::<f64>::zeros(n);
    for a in 0..n {
        let ia = active[a];
        rhs[a] = grad[ia] - grad[last];
        for c in 0..n {
            let ic = active[c];
            reduced[(a, c)] = q(ia, ic) - q(ia, last) - q(last, ic) + q(last, last);
        }
    }
    let scale = 1.0 + (0..n).map(|a| reduced[(a, a)]).fold(0.0, f64::max);
    let mut ridge = 1e-12 * scale;
    let y = loop {
        let mut regularised = reduced.clone();
        for a in 0..n {
            regularised[(a, a)] += ridge;
        }
        if let Some(chol) = regularised.cholesky() {
            break chol.solve(&rhs);
        }
        ridge *= 100.0;
    };
    let mut sum = 0.0;
    for a in 0..n {
        d[active[a]] = y[a];
        sum += y[a];
    }
    d[last] = -sum;
    let decrement = rhs.dot(&y);
    (d, decrement)
}

/// Per-decision memo shared by the experts of one agent.
#[derive(Debug, Default)]
pub struct SelectionCache {
    correlations: HashMap<usize, Vec<(usize, f64)>>,
    portfolios: HashMap<Vec<usize>, Portfolio>,
}

impl SelectionCache {
    pub fn new() -> Self {
        Self::default()
    }
}

/// What an expert sees at one decision.
#[derive(Debug, Clone, Copy)]
pub struct StepContext<'a> {
    /// Rows `0..t`.
    pub history: RelativesView<'a>,
    pub t: usize,
    /// First row of the agent's memory; candidate windows start at or after it.
    pub memory_start: usize,
    /// Cluster model for the expert's window size; `None` disables the fallback.
    pub clusters: Option<&'a ClusterModel>,
}

/// Window sizes up to this use no cluster fallback.
pub const FALLBACK_MIN_WINDOW: usize = 3;

/// Realises the previous decision on row `t - 1`, then selects the portfolio for day `t`:
/// correlation-similar days, else (for `w > 2`) cluster-similar days, else uniform.
pub fn expert_step(
    state: &mut ExpertState,
    ctx: &StepContext<'_>,
    cache: &mut SelectionCache,
) -> Result<SimilaritySource> {
    if let Some(b) = &state.portfolio {
        if ctx.t >= 1 && ctx.t <= ctx.history.n_days() {
            state.wealth *= b.gross_return(ctx.history.row(ctx.t - 1))?;
        }
    }
    let (portfolio, source) = select_portfolio(&state.spec, ctx, cache)?;
    state.portfolio = Some(portfolio);
    Ok(source)
}

fn select_portfolio(
    spec: &ExpertSpec,
    ctx: &StepContext<'_>,
    cache: &mut SelectionCache,
) -> Result<(Portfolio, SimilaritySource)> {
    let correlations = cache
        .correlations
        .entry(spec.w)
        .or_insert_with(|| window_correlations(ctx.history, ctx.t, spec.w, ctx.memory_start));
    let mut set = SimilarDaySet::new(
        correlations
            .iter()
            .filter(|&&(_, c)| c >= spec.rho)
            .map(|&(i, _)| i)
            .collect(),
        SimilaritySource::Correlation,
    );
    if set.is_empty() && spec.w >= FALLBACK_MIN_WINDOW {
        if let Some(model) = ctx.clusters {
            set = cluster_similar_set(model, ctx.t)?;
        }
    }
    if set.is_empty() {
        return Ok((
            uniform_portfolio(ctx.history.n_assets())?,
            SimilaritySource::Empty,
        ));
    }
    let source = set.source;
    if let Some(p) = cache.portfolios.get(&set.days) {
        return Ok((p.clone(), source));
    }
    let p = log_optimal_portfolio(ctx.history, &set)?;
    cache.portfolios.insert(set.days, p.clone());
    Ok((p, source))
}
