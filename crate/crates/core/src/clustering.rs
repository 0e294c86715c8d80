//! Online K-means over market vectors with Manhattan assignment, and the
//! per-agent centroid lifecycle (periodic growth and full resets).
//!
//! Assignment uses the L1 distance; the centroid update is the component-wise
//! mean. A fit alternates update and assignment passes until the fraction of
//! vectors that changed centroid in a pass is at most `epsilon`. An attempt
//! that fails to get there within `max_passes` passes is restarted from fresh
//! seeded centroids, up to `max_attempts` attempts in total; after that the
//! last state is kept.

use std::collections::HashSet;
use std::fmt;

use log::debug;
use rand::seq::index;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::market_data::{market_vector, window_vectors, MarketVector, RelativesView};

pub type Features = [f64; 4];

/// L1 distance.
pub fn manhattan(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    Ok(l1(a, b))
}

#[inline]
fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct KmuParams {
    /// Largest tolerated fraction of reassigned vectors in a terminating pass.
    pub epsilon: f64,
    pub max_attempts: usize,
    /// Assign/update passes per attempt before re-initialising.
    pub max_passes: usize,
}

impl Default for KmuParams {
    fn default() -> Self {
        Self {
            epsilon: 0.006,
            max_attempts: 10,
            max_passes: 100,
        }
    }
}

impl KmuParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!(
                "epsilon {} must lie in (0, 1)",
                self.epsilon
            )));
        }
        if self.max_attempts == 0 || self.max_passes == 0 {
            return Err(Error::Config(
                "max_attempts and max_passes must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// Outcome of the most recent fit of a model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FitStats {
    pub attempts: usize,
    pub passes: usize,
    pub converged: bool,
    pub requested: usize,
    pub used: usize,
}

/// Centroids and the vectors clustered around them, for one window size.
#[derive(Debug, Clone)]
pub struct ClusterModel {
    window_size: usize,
    centroids: Vec<Features>,
    /// Sorted by day; one entry per day.
    vectors: Vec<MarketVector>,
    assignments: Vec<usize>,
    rng: ChaCha8Rng,
    last_fit: FitStats,
}

/// Clusters `vectors` into `c` groups from seeded random initial centroids.
///
/// `c` is clamped to the number of distinct vectors.
pub fn kmu_online(
    vectors: Vec<MarketVector>,
    c: usize,
    params: &KmuParams,
    seed: u64,
) -> Result<ClusterModel> {
    let first = vectors
        .first()
        .ok_or(Error::Empty("no market vectors to cluster"))?;
    if c == 0 {
        return Err(Error::Config("centroid count must be at least 1".into()));
    }
    params.validate()?;
    let window_size = first.window_size;
    if let Some(v) = vectors.iter().find(|v| v.window_size != window_size) {
        return Err(Error::DimensionMismatch {
            expected: window_size,
            found: v.window_size,
        });
    }
    let mut vectors = vectors;
    vectors.sort_by_key(|v| v.day);
    vectors.dedup_by_key(|v| v.day);

    let mut model = ClusterModel {
        window_size,
        centroids: Vec::new(),
        assignments: Vec::new(),
        vectors,
        rng: ChaCha8Rng::seed_from_u64(seed),
        last_fit: FitStats::default(),
    };
    model.fit_fresh(c, params);
    Ok(model)
}

impl ClusterModel {
    pub fn window_size(&self) -> usize {
        self.window_size
    }

    pub fn centroids(&self) -> &[Features] {
        &self.centroids
    }

    pub fn vectors(&self) -> &[MarketVector] {
        &self.vectors
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn last_fit(&self) -> FitStats {
        self.last_fit
    }

    /// Centroid of the stored vector for `day`, if any.
    pub fn assignment_of(&self, day: usize) -> Option<usize> {
        self.vectors
            .binary_search_by_key(&day, |v| v.day)
            .ok()
            .map(|i| self.assignments[i])
    }

    /// Days of all stored vectors assigned to `centroid`, ascending.
    pub fn members(&self, centroid: usize) -> Vec<usize> {
        self.vectors
            .iter()
            .zip(&self.assignments)
            .filter(|(_, &a)| a == centroid)
            .map(|(v, _)| v.day)
            .collect()
    }

    /// Nearest centroid by L1 distance; ties go to the lowest index.
    pub fn nearest(&self, v: &Features) -> Result<usize> {
        if self.centroids.is_empty() {
            return Err(Error::Empty("cluster model has no centroids"));
        }
        Ok(nearest(&self.centroids, v))
    }

    /// Assigns `v` to its nearest centroid and stores it, replacing any vector for the same day.
    pub fn assign_vector(&mut self, v: MarketVector) -> Result<usize> {
        if v.window_size != self.window_size {
            return Err(Error::DimensionMismatch {
                expected: self.window_size,
                found: v.window_size,
            });
        }
        let k = self.nearest(&v.v)?;
        match self.vectors.binary_search_by_key(&v.day, |s| s.day) {
            Ok(i) => {
                self.vectors[i] = v;
                self.assignments[i] = k;
            }
            Err(i) => {
                self.vectors.insert(i, v);
                self.assignments.insert(i, k);
            }
        }
        Ok(k)
    }

    /// Appends an empty centroid at `position`.
    pub fn add_centroid(&mut self, position: Features) {
        self.centroids.push(position);
    }

    /// Drops stored vectors for which `keep` is false.
    pub fn retain(&mut self, mut keep: impl FnMut(&MarketVector) -> bool) {
        let mut i = 0;
        while i < self.vectors.len() {
            if keep(&self.vectors[i]) {
                i += 1;
            } else {
                self.vectors.remove(i);
                self.assignments.remove(i);
            }
        }
    }

    /// Re-runs the fit on the current store, warm-started from the current
    /// centroids when their count matches the (clamped) target.
    pub fn refit(&mut self, c: usize, params: &KmuParams) -> FitStats {
        let used = c.min(self.distinct_count()).max(1);
        if used > self.centroids.len() {
            let extra = self.sample_centroids(used - self.centroids.len());
            self.centroids.extend(extra);
        }
        if used != self.centroids.len() {
            return self.fit_fresh(c, params);
        }
        let feats = self.features();
        let assign = nearest_all(&feats, &self.centroids);
        let prev = if self.assignments.len() == feats.len() {
            std::mem::take(&mut self.assignments)
        } else {
            assign
        };
        let centroids = std::mem::take(&mut self.centroids);
        let mut stats = self.run(&feats, centroids, prev, params);
        stats.requested = c;
        self.last_fit = stats;
        stats
    }

    fn fit_fresh(&mut self, c: usize, params: &KmuParams) -> FitStats {
        let used = c.min(self.distinct_count()).max(1);
        if used < c {
            debug!(
                "window {}: {} centroids requested, clamped to {} distinct vectors",
                self.window_size, c, used
            );
        }
        let feats = self.features();
        let centroids = self.sample_centroids(used);
        let prev = nearest_all(&feats, &centroids);
        let mut stats = self.run(&feats, centroids, prev, params);
        stats.requested = c;
        self.last_fit = stats;
        stats
    }

    fn features(&self) -> Vec<Features> {
        self.vectors.iter().map(|v| v.v).collect()
    }

    fn distinct_count(&self) -> usize {
        distinct_indices(&self.vectors).len()
    }

    fn sample_centroids(&mut self, c: usize) -> Vec<Features> {
        let distinct = distinct_indices(&self.vectors);
        let c = c.min(distinct.len());
        index::sample(&mut self.rng, distinct.len(), c)
            .into_iter()
            .map(|i| self.vectors[distinct[i]].v)
            .collect()
    }

    /// Alternating update/assign passes starting from `assign`, with restarts.
    fn run(
        &mut self,
        feats: &[Features],
        mut centroids: Vec<Features>,
        mut assign: Vec<usize>,
        params: &KmuParams,
    ) -> FitStats {
        let tolerance = params.epsilon * feats.len() as f64;
        let c = centroids.len();
        let mut passes = 0;
        let mut attempts = 1;
        let converged = 'outer: loop {
            for _ in 0..params.max_passes {
                passes += 1;
                update_centroids(feats, &assign, &mut centroids);
                let next = nearest_all(feats, &centroids);
                let changes = next.iter().zip(&assign).filter(|(a, b)| a != b).count();
                assign = next;
                if changes as f64 <= tolerance {
                    break 'outer true;
                }
            }
            if attempts >= params.max_attempts {
                break false;
            }
            attempts += 1;
            centroids = self.sample_centroids(c);
            assign = nearest_all(feats, &centroids);
        };
        if !converged {
            debug!(
                "window {}: no fit within {} attempts; keeping the last readjustment",
                self.window_size, attempts
            );
        }
        self.centroids = centroids;
        self.assignments = assign;
        FitStats {
            attempts,
            passes,
            converged,
            requested: c,
            used: c,
        }
    }
}

fn nearest(centroids: &[Features], v: &Features) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (k, c) in centroids.iter().enumerate() {
        let d = l1(c, v);
        if d < best_d {
            best = k;
            best_d = d;
        }
    }
    best
}

fn nearest_all(feats: &[Features], centroids: &[Features]) -> Vec<usize> {
    feats.iter().map(|v| nearest(centroids, v)).collect()
}

/// Component-wise means; an empty centroid is re-seated on the vector lying
/// farthest from its own centroid.
fn update_centroids(feats: &[Features], assign: &[usize], centroids: &mut [Features]) {
    let c = centroids.len();
    let mut sums = vec![[0.0; 4]; c];
    let mut counts = vec![0usize; c];
    for (v, &a) in feats.iter().zip(assign) {
        counts[a] += 1;
        for i in 0..4 {
            sums[a][i] += v[i];
        }
    }
    for k in 0..c {
        if counts[k] > 0 {
            let n = counts[k] as f64;
            centroids[k] = sums[k].map(|s| s / n);
        }
    }
    let mut taken = vec![false; feats.len()];
    for k in (0..c).filter(|&k| counts[k] == 0) {
        let far = (0..feats.len())
            .filter(|&i| !taken[i])
            .map(|i| (i, l1(&feats[i], &centroids[assign[i]])))
            .fold(None, |best: Option<(usize, f64)>, (i, d)| match best {
                Some((_, bd)) if bd >= d => best,
                _ => Some((i, d)),
            });
        if let Some((i, _)) = far {
            taken[i] = true;
            centroids[k] = feats[i];
        }
    }
}

fn distinct_indices(vectors: &[MarketVector]) -> Vec<usize> {
    let mut seen = HashSet::new();
    vectors
        .iter()
        .enumerate()
        .filter(|(_, v)| seen.insert(v.v.map(f64::to_bits)))
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ClusterLifecycleConfig {
    /// Agent memory length in days.
    pub d: usize,
    /// Largest window size; one model per size `1..=max_window`.
    pub max_window: usize,
    pub params: KmuParams,
    pub seed: u64,
}

impl ClusterLifecycleConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.max_window == 0 {
            return Err(Error::Config("max window size must be at least 1".into()));
        }
        if self.d <= self.max_window {
            return Err(Error::Config(format!(
                "memory d = {} must exceed the max window size {}",
                self.d, self.max_window
            )));
        }
        Ok(())
    }

    /// Centroid count after initialisation or reset, also the growth period.
    pub fn initial_centroids(&self) -> usize {
        (self.d / 3).max(1)
    }

    pub fn growth_interval(&self) -> usize {
        self.initial_centroids()
    }

    pub fn reset_interval(&self) -> usize {
        2 * self.d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LifecycleEventKind {
    Init {
        centroids: usize,
    },
    Reset {
        centroids: usize,
    },
    AddCentroid {
        centroids: usize,
    },
    Clamp {
        window: usize,
        requested: usize,
        used: usize,
    },
    Restarts {
        window: usize,
        attempts: usize,
        converged: bool,
    },
}

/// One run-log entry; `t` is the decision day (rows `0..t` known).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LifecycleEvent {
    pub t: usize,
    pub d: usize,
    pub kind: LifecycleEventKind,
}

impl fmt::Display for LifecycleEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t={} d={} ", self.t, self.d)?;
        match self.kind {
            LifecycleEventKind::Init { centroids } => write!(f, "init centroids={centroids}"),
            LifecycleEventKind::Reset { centroids } => write!(f, "reset centroids={centroids}"),
            LifecycleEventKind::AddCentroid { centroids } => {
                write!(f, "add-centroid centroids={centroids}")
            }
            LifecycleEventKind::Clamp {
                window,
                requested,
                used,
            } => write!(f, "clamp w={window} requested={requested} used={used}"),
            LifecycleEventKind::Restarts {
                window,
                attempts,
                converged,
            } => write!(
                f,
                "restarts w={window} attempts={attempts} converged={converged}"
            ),
        }
    }
}

/// The cluster models of one agent and the schedule that maintains them.
#[derive(Debug, Clone)]
pub struct ClusterLifecycle {
    config: ClusterLifecycleConfig,
    centroid_target: usize,
    models: Vec<ClusterModel>,
    rng: ChaCha8Rng,
    events: Vec<LifecycleEvent>,
}

impl ClusterLifecycle {
    /// Clusters the `d` rows before `t` for every window size.
    pub fn init(
        config: ClusterLifecycleConfig,
        t: usize,
        relatives: RelativesView<'_>,
    ) -> Result<Self> {
        config.validate()?;
        let mut lc = Self {
            config,
            centroid_target: config.initial_centroids(),
            models: Vec::new(),
            rng: ChaCha8Rng::seed_from_u64(config.seed),
            events: Vec::new(),
        };
        lc.reinit(t, relatives)?;
        lc.log(
            t,
            LifecycleEventKind::Init {
                centroids: lc.centroid_target,
            },
        );
        Ok(lc)
    }

    pub fn config(&self) -> &ClusterLifecycleConfig {
        &self.config
    }

    pub fn centroid_target(&self) -> usize {
        self.centroid_target
    }

    /// Model for window size `w` (1-based).
    pub fn model(&self, w: usize) -> Option<&ClusterModel> {
        w.checked_sub(1).and_then(|i| self.models.get(i))
    }

    pub fn models(&self) -> &[ClusterModel] {
        &self.models
    }

    pub fn events(&self) -> &[LifecycleEvent] {
        &self.events
    }

    /// Advances to decision day `t`, where row `t - 1` is the newest known row.
    ///
    /// Every `2d` days the models are rebuilt from the latest `d` rows;
    /// otherwise a centroid is added every `floor(d / 3)` days and the newest
    /// vector of each window size is clustered in. Stored vectors whose window
    /// starts before `memory_start` are dropped first.
    pub fn step(
        &mut self,
        t: usize,
        relatives: RelativesView<'_>,
        memory_start: usize,
    ) -> Result<()> {
        let d = self.config.d;
        if t <= d || relatives.n_days() < t {
            return Err(Error::NotEnoughData(format!(
                "lifecycle step at day {t} needs t > {d} and {t} known rows, found {}",
                relatives.n_days()
            )));
        }
        if t.is_multiple_of(self.config.reset_interval()) {
            self.centroid_target = self.config.initial_centroids();
            self.reinit(t, relatives)?;
            self.log(
                t,
                LifecycleEventKind::Reset {
                    centroids: self.centroid_target,
                },
            );
            return Ok(());
        }

        let grow = t.is_multiple_of(self.config.growth_interval());
        if grow {
            self.centroid_target += 1;
            self.log(
                t,
                LifecycleEventKind::AddCentroid {
                    centroids: self.centroid_target,
                },
            );
        }
        for w in 1..=self.config.max_window {
            let v = market_vector(&relatives.window(t - 1, w)?)?;
            let model = &mut self.models[w - 1];
            model.retain(|s| s.day + 1 - w >= memory_start);
            if grow {
                model.add_centroid(v.v);
            }
            model.assign_vector(v)?;
            let stats = model.refit(self.centroid_target, &self.config.params);
            self.note_fit(t, w, stats);
        }
        Ok(())
    }

    fn reinit(&mut self, t: usize, relatives: RelativesView<'_>) -> Result<()> {
        let d = self.config.d;
        let start = t.checked_sub(d).ok_or_else(|| {
            Error::NotEnoughData(format!("clustering at day {t} needs {d} prior rows"))
        })?;
        self.models.clear();
        for w in 1..=self.config.max_window {
            let vectors = window_vectors(relatives, w, start..t)?;
            let seed = self.rng.next_u64();
            let model = kmu_online(vectors, self.centroid_target, &self.config.params, seed)?;
            let stats = model.last_fit();
            self.models.push(model);
            self.note_fit(t, w, stats);
        }
        Ok(())
    }

    fn note_fit(&mut self, t: usize, window: usize, stats: FitStats) {
        if stats.used < stats.requested {
            self.log(
                t,
                LifecycleEventKind::Clamp {
                    window,
                    requested: stats.requested,
                    used: stats.used,
                },
            );
        }
        if stats.attempts > 1 || !stats.converged {
            self.log(
                t,
                LifecycleEventKind::Restarts {
                    window,
                    attempts: stats.attempts,
                    converged: stats.converged,
                },
            );
        }
    }

    fn log(&mut self, t: usize, kind: LifecycleEventKind) {
        let event = LifecycleEvent {
            t,
            d: self.config.d,
            kind,
        };
        debug!("{event}");
        self.events.push(event);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::market_data::PriceRelativeMatrix;

    fn mv(day: usize, v: Features) -> MarketVector {
        MarketVector {
            v,
            window_size: 3,
            day,
        }
    }

    #[test]
    fn manhattan_examples() {
        let a = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(manhattan(&a, &a).unwrap(), 0.0);
        assert_eq!(manhattan(&[0.0; 4], &[1.0; 4]).unwrap(), 4.0);
        assert_eq!(manhattan(&a, &[4.0, 3.0, 2.0, 1.0]).unwrap(), 8.0);
        assert!(manhattan(&a, &[1.0]).is_err());
    }

    #[test]
    fn identical_vectors_one_centroid() {
        let vs = (0..8).map(|d| mv(d, [1.0, 2.0, 3.0, 4.0])).collect();
        let model = kmu_online(vs, 1, &KmuParams::default(), 7).unwrap();
        assert_eq!(model.centroids(), [[1.0, 2.0, 3.0, 4.0]]);
        assert!(model.last_fit().converged);
        assert_eq!(model.last_fit().attempts, 1);
    }

    #[test]
    fn single_centroid_is_mean() {
        let vs: Vec<_> = (0..5)
            .map(|d| mv(d, [d as f64, 2.0 * d as f64, 1.0, -(d as f64)]))
            .collect();
        let model = kmu_online(vs, 1, &KmuParams::default(), 1).unwrap();
        let c = model.centroids()[0];
        for (x, y) in c.iter().zip([2.0, 4.0, 1.0, -2.0]) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn clamps_to_distinct_vectors() {
        let vs = (0..6)
            .map(|d| mv(d, if d % 2 == 0 { [0.0; 4] } else { [1.0; 4] }))
            .collect();
        let model = kmu_online(vs, 5, &KmuParams::default(), 3).unwrap();
        assert_eq!(model.centroids().len(), 2);
        assert_eq!(model.last_fit().requested, 5);
        assert_eq!(model.last_fit().used, 2);
    }

    #[test]
    fn assign_vector_rules() {
        let vs = vec![mv(0, [0.0; 4]), mv(1, [2.0; 4]), mv(2, [10.0; 4])];
        let mut model = kmu_online(vs, 3, &KmuParams::default(), 11).unwrap();
        let target = model
            .centroids()
            .iter()
            .position(|c| *c == [10.0; 4])
            .unwrap();
        assert_eq!(model.assign_vector(mv(3, [10.0; 4])).unwrap(), target);
        assert_eq!(model.assignment_of(3), Some(target));

        let single = kmu_online(vec![mv(0, [5.0; 4])], 1, &KmuParams::default(), 0).unwrap();
        assert_eq!(single.nearest(&[-100.0; 4]).unwrap(), 0);

        // equidistant between two centroids goes to the lower index
        let mut tie = single.clone();
        tie.centroids = vec![[0.0; 4], [2.0; 4]];
        assert_eq!(tie.nearest(&[1.0; 4]).unwrap(), 0);

        let mut empty = single;
        empty.centroids.clear();
        assert!(empty.assign_vector(mv(9, [0.0; 4])).is_err());
    }

    #[test]
    fn empty_input_rejected() {
        assert!(kmu_online(Vec::new(), 2, &KmuParams::default(), 0).is_err());
        assert!(kmu_online(vec![mv(0, [0.0; 4])], 0, &KmuParams::default(), 0).is_err());
    }

    #[test]
    fn deterministic_under_seed() {
        let vs: Vec<_> = (0..40)
            .map(|d| {
                let x = (d as f64 * 0.37).sin();
                mv(d, [x, x * x, (d % 7) as f64, 0.1 * d as f64])
            })
            .collect();
        let a = kmu_online(vs.clone(), 4, &KmuParams::default(), 99).unwrap();
        let b = kmu_online(vs, 4, &KmuParams::default(), 99).unwrap();
        assert_eq!(a.centroids(), b.centroids());
        assert_eq!(a.assignments(), b.assignments());
    }

    fn lifecycle_data(n: usize) -> PriceRelativeMatrix {
        let data = (0..n * 3)
            .map(|i| 1.0 + 0.01 * ((i as f64 * 1.7).sin() + 0.5 * (i as f64 * 0.31).cos()))
            .collect();
        PriceRelativeMatrix::from_flat(data, 3).unwrap()
    }

    fn config(d: usize) -> ClusterLifecycleConfig {
        ClusterLifecycleConfig {
            d,
            max_window: 5,
            params: KmuParams::default(),
            seed: 5,
        }
    }

    #[test]
    fn lifecycle_schedule_examples() {
        let rel = lifecycle_data(40);
        let mut lc = ClusterLifecycle::init(config(10), 10, rel.view()).unwrap();
        assert_eq!(lc.centroid_target(), 3);
        for t in 11..=20 {
            let mem_start = if t >= 20 { t - 10 } else { 0 };
            let before = lc.centroid_target();
            lc.step(t, rel.view().prefix(t), mem_start).unwrap();
            match t {
                11 | 13 => assert_eq!(lc.centroid_target(), before),
                12 | 15 | 18 => assert_eq!(lc.centroid_target(), before + 1),
                20 => assert_eq!(lc.centroid_target(), 3),
                _ => {}
            }
        }
        let resets: Vec<_> = lc
            .events()
            .iter()
            .filter(|e| matches!(e.kind, LifecycleEventKind::Reset { .. }))
            .map(|e| e.t)
            .collect();
        assert_eq!(resets, [20]);
        // reset keeps vectors of the latest d rows only
        assert_eq!(lc.model(5).unwrap().len(), 10 - 5 + 1);
    }

    #[test]
    fn lifecycle_appends_one_vector_per_window() {
        let rel = lifecycle_data(30);
        let mut lc = ClusterLifecycle::init(config(10), 10, rel.view()).unwrap();
        let before: Vec<_> = lc.models().iter().map(ClusterModel::len).collect();
        lc.step(11, rel.view().prefix(11), 0).unwrap();
        for (w, m) in lc.models().iter().enumerate() {
            assert_eq!(m.len(), before[w] + 1);
            assert!(m.assignment_of(10).is_some());
        }
    }

    #[test]
    fn lifecycle_rejects_early_step() {
        let rel = lifecycle_data(30);
        let mut lc = ClusterLifecycle::init(config(10), 10, rel.view()).unwrap();
        assert!(lc.step(10, rel.view().prefix(10), 0).is_err());
        assert!(ClusterLifecycle::init(config(5), 10, rel.view()).is_err());
    }

    #[test]
    fn event_lines_are_plain_text() {
        let e = LifecycleEvent {
            t: 12,
            d: 10,
            kind: LifecycleEventKind::AddCentroid { centroids: 4 },
        };
        assert_eq!(e.to_string(), "t=12 d=10 add-centroid centroids=4");
    }
}
