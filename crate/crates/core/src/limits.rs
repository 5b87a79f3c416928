//! Finite-horizon estimates of `I`-limit points (Λ) and `I`-cluster points (Γ).
//!
//! Both sides look at the neighbourhood index sets `{n : |x_n − ℓ| ≤ ε}` for a
//! decreasing ε-schedule and a finite candidate grid of ℓ. A candidate's
//! Λ-score is the smallest neighbourhood score over the schedule, with a
//! neighbourhood whose trace is vanishing counting as 0; its Γ-score is the
//! score at the finest ε whose neighbourhood is not vanishing.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ideal::{Gauge, IdealSpec};
use crate::sequence::SequenceSource;
use crate::set::TruncatedSet;

pub const DEFAULT_EPS_SCHEDULE: [f64; 4] = [1e-1, 1e-2, 1e-3, 1e-4];
/// Observed values occurring at least this fraction of `N` times become candidates.
pub const DEFAULT_MULTIPLICITY_FLOOR: f64 = 1e-4;
pub const DEFAULT_GRID_POINTS: usize = 101;

/// `{n ≤ N : |x_n − ℓ| ≤ ε}`, by direct scan.
pub fn neighborhood_index_set(x: &SequenceSource, ell: f64, eps: f64) -> Result<TruncatedSet> {
    if !(eps > 0.0) {
        return Err(Error::param(format!(
            "neighbourhood radius {eps} must be positive"
        )));
    }
    Ok(TruncatedSet::from_predicate(x.horizon(), |n| {
        (x.get(n) - ell).abs() <= eps
    }))
}

/// Values sorted once so that each neighbourhood is a binary search away.
pub struct NeighborhoodIndex {
    horizon: usize,
    sorted: Vec<(f64, u32)>,
}

impl NeighborhoodIndex {
    pub fn new(x: &SequenceSource) -> Result<Self> {
        if x.horizon() > u32::MAX as usize {
            return Err(Error::param("sequence too long to index"));
        }
        let mut sorted: Vec<(f64, u32)> = x
            .values()
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i as u32 + 1))
            .collect();
        sorted.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        Ok(NeighborhoodIndex {
            horizon: x.horizon(),
            sorted,
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Same set as [`neighborhood_index_set`].
    pub fn neighborhood(&self, ell: f64, eps: f64) -> TruncatedSet {
        // widen the search window slightly, then filter exactly
        let pad = eps * 1e-9 + f64::EPSILON * ell.abs();
        let lo = self.sorted.partition_point(|(v, _)| *v < ell - eps - pad);
        let hi = self.sorted.partition_point(|(v, _)| *v <= ell + eps + pad);
        let mut set = TruncatedSet::empty(self.horizon);
        for &(v, n) in &self.sorted[lo..hi] {
            if (v - ell).abs() <= eps {
                set.insert(n as usize);
            }
        }
        set
    }

    /// Distinct values that occur at least `min_count` times.
    pub fn frequent_values(&self, min_count: usize) -> Vec<f64> {
        let mut out = Vec::new();
        let mut i = 0;
        while i < self.sorted.len() {
            let v = self.sorted[i].0;
            let j = i + self.sorted[i..].partition_point(|(w, _)| w.total_cmp(&v).is_le());
            if j - i >= min_count.max(1) {
                out.push(v);
            }
            i = j;
        }
        out
    }

    pub fn min(&self) -> f64 {
        self.sorted[0].0
    }

    pub fn max(&self) -> f64 {
        self.sorted[self.sorted.len() - 1].0
    }
}

/// Strictly decreasing, positive radii.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct EpsSchedule(Vec<f64>);

impl EpsSchedule {
    pub fn new(eps: Vec<f64>) -> Result<Self> {
        if eps.is_empty() {
            return Err(Error::EmptySchedule);
        }
        if eps.iter().any(|e| !(*e > 0.0) || !e.is_finite()) {
            return Err(Error::param("ε values must be positive and finite"));
        }
        if eps.windows(2).any(|w| w[0] <= w[1]) {
            return Err(Error::param("ε schedule must be strictly decreasing"));
        }
        Ok(EpsSchedule(eps))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

impl Default for EpsSchedule {
    fn default() -> Self {
        EpsSchedule(DEFAULT_EPS_SCHEDULE.to_vec())
    }
}

/// How candidate points ℓ are generated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    /// Observed values with multiplicity at least this fraction of `N`;
    /// `None` disables them.
    pub multiplicity_floor: Option<f64>,
    /// Approximate number of uniform points over `[min x, max x]`, snapped to
    /// a 1-2-5 step so that round values such as 0 appear exactly.
    pub uniform_points: usize,
    pub extra: Vec<f64>,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            multiplicity_floor: Some(DEFAULT_MULTIPLICITY_FLOOR),
            uniform_points: DEFAULT_GRID_POINTS,
            extra: Vec::new(),
        }
    }
}

impl GridSpec {
    pub fn explicit(points: Vec<f64>) -> Self {
        GridSpec {
            multiplicity_floor: None,
            uniform_points: 0,
            extra: points,
        }
    }

    pub fn candidates(&self, index: &NeighborhoodIndex) -> Vec<f64> {
        let mut points = self.extra.clone();
        if let Some(floor) = self.multiplicity_floor {
            let min_count = (floor * index.horizon() as f64).ceil() as usize;
            points.extend(index.frequent_values(min_count));
        }
        if self.uniform_points > 0 {
            points.extend(snapped_grid(index.min(), index.max(), self.uniform_points));
        }
        points.retain(|p| p.is_finite());
        points.sort_by(f64::total_cmp);
        points.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
        points
    }
}

fn snapped_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let range = hi - lo;
    if count < 2 || range <= 0.0 {
        return vec![lo];
    }
    // a hair of tolerance so that a range just under a round number keeps its step
    let raw = range / (count - 1) as f64 * (1.0 + 1e-3);
    let mag = 10f64.powf(raw.log10().floor());
    let step = [5.0, 2.0, 1.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s <= raw)
        .unwrap_or(mag);
    let first = (lo / step).floor() as i64;
    let last = (hi / step - 1e-9).ceil() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsEntry {
    pub eps: f64,
    pub score: f64,
    pub vanishing: bool,
    pub members: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Candidate {
    pub ell: f64,
    /// Λ-score.
    pub score: f64,
    pub eps_trace: Vec<EpsEntry>,
    pub in_lambda: bool,
    pub cluster_score: f64,
    /// Radius the cluster score was read at; `None` if every neighbourhood vanished.
    pub cluster_eps: Option<f64>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct GammaMember {
    pub ell: f64,
    pub score: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportParams {
    pub ideal: IdealSpec,
    pub horizon: usize,
    pub q: f64,
    pub gamma_threshold: f64,
    pub eps_schedule: EpsSchedule,
    pub grid: GridSpec,
}

#[derive(Debug, Clone, Serialize)]
pub struct LimitPointReport {
    /// Every candidate, sorted by `ell`.
    pub candidates: Vec<Candidate>,
    pub gamma: Vec<GammaMember>,
    pub params: ReportParams,
}

impl LimitPointReport {
    /// Candidates with Λ-score at least `q`.
    pub fn lambda_at(&self, q: f64) -> Vec<f64> {
        self.candidates
            .iter()
            .filter(|c| c.score >= q)
            .map(|c| c.ell)
            .collect()
    }

    /// Candidates with Γ-score at least `q`.
    pub fn gamma_at(&self, q: f64) -> Vec<f64> {
        self.candidates
            .iter()
            .filter(|c| c.cluster_score >= q)
            .map(|c| c.ell)
            .collect()
    }

    pub fn lambda(&self) -> Vec<f64> {
        self.lambda_at(self.params.q)
    }

    pub fn nearest(&self, ell: f64) -> Option<&Candidate> {
        self.candidates
            .iter()
            .min_by(|a, b| (a.ell - ell).abs().total_cmp(&(b.ell - ell).abs()))
    }
}

fn score_candidate(
    index: &NeighborhoodIndex,
    gauge: &dyn Gauge,
    ell: f64,
    eps: &EpsSchedule,
    q: f64,
) -> Result<Candidate> {
    let mut trace = Vec::with_capacity(eps.values().len());
    for &e in eps.values() {
        let set = index.neighborhood(ell, e);
        let l = gauge.measure(&set)?;
        trace.push(EpsEntry {
            eps: e,
            score: l.score.clamp(0.0, 1.0),
            vanishing: l.vanishing,
            members: set.len(),
        });
    }
    let score = trace
        .iter()
        .map(|t| if t.vanishing { 0.0 } else { t.score })
        .fold(f64::INFINITY, f64::min);
    let finest = trace.iter().rev().find(|t| !t.vanishing);
    Ok(Candidate {
        ell,
        score,
        in_lambda: score >= q,
        cluster_score: finest.map_or(0.0, |t| t.score),
        cluster_eps: finest.map(|t| t.eps),
        eps_trace: trace,
    })
}

/// Scores every grid candidate on both the Λ and the Γ side.
///
/// Candidates are evaluated in parallel on the current rayon pool; the
/// report is the same for any number of threads.
pub fn analyze(
    x: &SequenceSource,
    ideal: &IdealSpec,
    q: f64,
    gamma_threshold: f64,
    grid: &GridSpec,
    eps: &EpsSchedule,
) -> Result<LimitPointReport> {
    if !(q > 0.0) {
        return Err(Error::param(format!("threshold q = {q} must be positive")));
    }
    let index = NeighborhoodIndex::new(x)?;
    let points = grid.candidates(&index);
    if points.is_empty() {
        return Err(Error::EmptySet("candidate grid"));
    }
    let gauge = ideal.gauge(x.horizon())?;
    let candidates = points
        .par_iter()
        .map(|&ell| score_candidate(&index, gauge.as_ref(), ell, eps, q))
        .collect::<Result<Vec<_>>>()?;
    let gamma = candidates
        .iter()
        .filter(|c| c.cluster_score >= gamma_threshold)
        .map(|c| GammaMember {
            ell: c.ell,
            score: c.cluster_score,
            eps: c.cluster_eps.expect("positive cluster score has a radius"),
        })
        .collect();
    Ok(LimitPointReport {
        candidates,
        gamma,
        params: ReportParams {
            ideal: ideal.clone(),
            horizon: x.horizon(),
            q,
            gamma_threshold,
            eps_schedule: eps.clone(),
            grid: grid.clone(),
        },
    })
}

/// Λ side: `ℓ ∈ Λ(x, q)` iff its score reaches `q`.
pub fn limit_points_estimate(
    x: &SequenceSource,
    ideal: &IdealSpec,
    q: f64,
    grid: &GridSpec,
    eps: &EpsSchedule,
) -> Result<LimitPointReport> {
    analyze(x, ideal, q, q, grid, eps)
}

/// Γ side: candidates whose cluster score reaches `threshold`.
pub fn cluster_points_estimate(
    x: &SequenceSource,
    ideal: &IdealSpec,
    threshold: f64,
    grid: &GridSpec,
    eps: &EpsSchedule,
) -> Result<LimitPointReport> {
    analyze(x, ideal, threshold, threshold, grid, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::{make_sequence, SequenceKind};

    #[test]
    fn index_matches_scan() {
        let x = make_sequence(&SequenceKind::Lpf, Some(5000), None).unwrap();
        let index = NeighborhoodIndex::new(&x).unwrap();
        for (ell, eps) in [
            (0.5, 0.01),
            (0.0, 0.06),
            (1.0 / 3.0, 1e-4),
            (0.25, 0.3),
            (0.4, 0.01),
        ] {
            assert_eq!(
                index.neighborhood(ell, eps),
                neighborhood_index_set(&x, ell, eps).unwrap()
            );
        }
        let evens = TruncatedSet::from_predicate(5000, |n| n % 2 == 0);
        assert_eq!(index.neighborhood(0.5, 0.01), evens);
    }

    #[test]
    fn snapped_grid_hits_round_values() {
        let g = snapped_grid(1e-6, 1.0, 101);
        assert_eq!(g.len(), 101);
        assert_eq!(g[0], 0.0);
        assert!((g[50] - 0.5).abs() < 1e-12);
        assert_eq!(snapped_grid(0.3, 0.3, 101), vec![0.3]);
    }

    #[test]
    fn eps_schedule_validation() {
        assert!(EpsSchedule::new(vec![0.1, 0.1]).is_err());
        assert!(EpsSchedule::new(vec![0.1, -0.01]).is_err());
        assert!(EpsSchedule::new(vec![]).is_err());
        assert!(EpsSchedule::new(vec![0.5, 0.01]).is_ok());
    }

    #[test]
    fn constant_sequence_has_single_limit() {
        let x = make_sequence(&"constant:0.3".parse().unwrap(), Some(1 << 14), None).unwrap();
        let ideal = IdealSpec::alpha(0.0).unwrap();
        let r = limit_points_estimate(
            &x,
            &ideal,
            0.1,
            &GridSpec::default(),
            &EpsSchedule::default(),
        )
        .unwrap();
        assert_eq!(r.lambda(), vec![0.3]);
        assert!((r.candidates[0].score - 0.5).abs() < 1e-9);
        assert!(limit_points_estimate(
            &x,
            &ideal,
            0.0,
            &GridSpec::default(),
            &EpsSchedule::default()
        )
        .is_err());
    }
}
