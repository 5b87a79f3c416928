//! Weighted upper densities and summable tails at finite horizon.
//!
//! `d*_f(S) = limsup_n Σ_{i∈S∩[1,n]} f(i) / Σ_{i∈[1,n]} f(i)` is estimated on a
//! geometric schedule of horizons. The limsup becomes the maximum of the
//! ratio trace over the upper half of the schedule, except when that trace is
//! visibly decaying, in which case the last observed ratio is the tighter
//! upper estimate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::set::TruncatedSet;
use crate::weight::WeightFunction;

/// Default number of schedule points.
pub const DEFAULT_SCHEDULE_POINTS: usize = 20;

/// A trace counts as decaying when its last value drops below this fraction
/// of its reliable peak.
pub const DECAY_RATIO: f64 = 0.85;

/// Members needed before a prefix or block is trusted by the decay test.
pub const MIN_RELIABLE_COUNT: usize = 400;

/// Count floor for the decay test, relaxed for sparse sets so that a set
/// whose last sample holds few members can still be seen to decay.
pub(crate) fn reliable_floor(last_count: usize) -> usize {
    MIN_RELIABLE_COUNT.min(last_count / 2).max(1)
}

/// Three-valued ideal membership verdict.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    In,
    Out,
    Inconclusive,
}

impl Verdict {
    /// `In` when the estimate is decaying or at most `in_below`, `Out` when it
    /// is at least `out_above`, otherwise `Inconclusive`.
    pub fn classify(value: f64, vanishing: bool, in_below: f64, out_above: f64) -> Verdict {
        if vanishing || value <= in_below {
            Verdict::In
        } else if value >= out_above {
            Verdict::Out
        } else {
            Verdict::Inconclusive
        }
    }
}

/// Thresholds for density-scale verdicts.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct Thresholds {
    pub in_below: f64,
    pub out_above: f64,
}

impl Thresholds {
    pub const DENSITY: Thresholds = Thresholds {
        in_below: 0.002,
        out_above: 0.01,
    };

    pub fn scaled(self, factor: f64) -> Thresholds {
        Thresholds {
            in_below: self.in_below * factor,
            out_above: self.out_above * factor,
        }
    }
}

/// Increasing horizons at which ratio traces are sampled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Schedule {
    points: Vec<usize>,
}

impl Schedule {
    pub fn new(mut points: Vec<usize>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySchedule);
        }
        points.sort_unstable();
        points.dedup();
        if points[0] == 0 {
            return Err(Error::param("schedule points must be positive"));
        }
        Ok(Schedule { points })
    }

    /// `count` geometric points from `√N` up to `N`, the last one exactly `N`.
    pub fn geometric(horizon: usize, count: usize) -> Result<Self> {
        if horizon == 0 || count == 0 {
            return Err(Error::EmptySchedule);
        }
        let log_n = (horizon as f64).ln();
        let points = (0..count)
            .map(|j| {
                let t = if count == 1 {
                    1.0
                } else {
                    j as f64 / (count - 1) as f64
                };
                let n = (0.5 * (1.0 + t) * log_n).exp().round() as usize;
                n.clamp(1, horizon)
            })
            .chain(std::iter::once(horizon))
            .collect();
        Schedule::new(points)
    }

    pub fn default_for(horizon: usize) -> Result<Self> {
        Self::geometric(horizon, DEFAULT_SCHEDULE_POINTS)
    }

    pub fn points(&self) -> &[usize] {
        &self.points
    }

    pub fn last(&self) -> usize {
        *self.points.last().expect("schedule is non-empty")
    }

    /// Index of the first point of the upper half.
    pub fn tail_start(&self) -> usize {
        self.points.len() / 2
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct DensityEstimate {
    pub value: f64,
    pub weight: WeightFunction,
    /// `(n, ratio at n)` for every schedule point.
    pub trace: Vec<(usize, f64)>,
    pub tail_start: usize,
    /// `max − min` of the ratio over the tail; small means the trace settled.
    pub tail_spread: f64,
    pub vanishing: bool,
    pub verdict: Verdict,
}

impl DensityEstimate {
    pub fn ratios(&self) -> impl Iterator<Item = f64> + '_ {
        self.trace.iter().map(|(_, r)| *r)
    }
}

/// Upper α-density with weights `i^α`.
pub fn upper_alpha_density(
    set: &TruncatedSet,
    alpha: f64,
    schedule: &Schedule,
) -> Result<DensityEstimate> {
    let weight = WeightFunction::power(alpha)?;
    upper_weighted_density(set, &weight, schedule)
}

/// Upper density for an arbitrary positive weight.
pub fn upper_weighted_density(
    set: &TruncatedSet,
    weight: &WeightFunction,
    schedule: &Schedule,
) -> Result<DensityEstimate> {
    let needed = schedule.last();
    if set.horizon() < needed {
        return Err(Error::HorizonTooSmall {
            horizon: set.horizon(),
            needed,
        });
    }
    weight.check_range(needed)?;

    let mut trace = Vec::with_capacity(schedule.points().len());
    let mut counts = Vec::with_capacity(schedule.points().len());
    if weight.is_unit() {
        for &n in schedule.points() {
            let c = set.count_upto(n);
            trace.push((n, c as f64 / n as f64));
            counts.push(c);
        }
    } else {
        let mut total = 0.0;
        let mut inside = 0.0;
        let mut count = 0;
        let mut next = 1;
        for &point in schedule.points() {
            for n in next..=point {
                let w = weight.eval(n);
                total += w;
                if set.contains(n) {
                    inside += w;
                    count += 1;
                }
            }
            next = point + 1;
            trace.push((point, inside / total));
            counts.push(count);
        }
    }

    let tail_start = schedule.tail_start();
    let tail: Vec<f64> = trace[tail_start..].iter().map(|(_, r)| *r).collect();
    let peak = tail.iter().copied().fold(0.0, f64::max);
    let floor = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let last = *tail.last().expect("tail is non-empty");
    let floor_count = reliable_floor(*counts.last().expect("non-empty schedule"));
    let reliable_peak = trace[tail_start..]
        .iter()
        .zip(&counts[tail_start..])
        .filter(|(_, c)| **c >= floor_count)
        .map(|((_, r), _)| *r)
        .fold(0.0, f64::max);
    let vanishing = reliable_peak > 0.0 && last < DECAY_RATIO * reliable_peak;
    let value = if vanishing { last } else { peak };
    let t = Thresholds::DENSITY;
    Ok(DensityEstimate {
        value,
        weight: weight.clone(),
        trace,
        tail_start,
        tail_spread: peak - floor,
        vanishing,
        verdict: Verdict::classify(value, vanishing, t.in_below, t.out_above),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SummableTail {
    pub cutpoints: Vec<usize>,
    /// `Σ_{s∈S, n<s≤N} f(s)` for each cutpoint `n`.
    pub tails: Vec<f64>,
    /// Last tail over first tail; 0 when the first tail is 0.
    pub flattening_ratio: f64,
    pub verdict: Verdict,
}

/// Flattening ratio at or below which a set is judged summable.
pub const SUMMABLE_IN_BELOW: f64 = 0.1;
/// Flattening ratio at or above which a set is judged non-summable.
pub const SUMMABLE_OUT_ABOVE: f64 = 0.25;

/// `0` followed by geometric cutpoints up to `⌊√N⌋`.
pub fn default_cutpoints(horizon: usize) -> Vec<usize> {
    let root = (horizon as f64).sqrt().floor() as usize;
    let mut cuts = vec![0];
    let mut c = 1;
    while c < root {
        cuts.push(c);
        c *= 4;
    }
    cuts.push(root.max(1));
    cuts.dedup();
    cuts
}

/// Tail masses of `S` beyond each cutpoint, truncated at the horizon.
pub fn summable_tail(
    set: &TruncatedSet,
    weight: &WeightFunction,
    cutpoints: &[usize],
) -> Result<SummableTail> {
    if cutpoints.is_empty() {
        return Err(Error::EmptySchedule);
    }
    if cutpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::param("cutpoints must be strictly increasing"));
    }
    let horizon = set.horizon();
    if let Some(&c) = cutpoints.iter().find(|&&c| c > horizon) {
        return Err(Error::HorizonTooSmall { horizon, needed: c });
    }
    weight.check_range(horizon)?;

    // accumulate from the top so each tail is a running sum
    let mut tails = vec![0.0; cutpoints.len()];
    let mut running = 0.0;
    let mut members: Vec<usize> = set.iter().collect();
    members.reverse();
    let mut it = members.into_iter().peekable();
    for (slot, &cut) in cutpoints.iter().enumerate().rev() {
        while let Some(&s) = it.peek() {
            if s <= cut {
                break;
            }
            running += weight.eval(s);
            it.next();
        }
        tails[slot] = running;
    }
    let first = tails[0];
    let last = *tails.last().expect("non-empty");
    let flattening_ratio = if first > 0.0 { last / first } else { 0.0 };
    let verdict = if first == 0.0 {
        Verdict::In
    } else {
        Verdict::classify(
            flattening_ratio,
            false,
            SUMMABLE_IN_BELOW,
            SUMMABLE_OUT_ABOVE,
        )
    };
    Ok(SummableTail {
        cutpoints: cutpoints.to_vec(),
        tails,
        flattening_ratio,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_shape() {
        let s = Schedule::default_for(1_000_000).unwrap();
        assert_eq!(s.points().len(), 20);
        assert_eq!(s.points()[0], 1000);
        assert_eq!(s.last(), 1_000_000);
        assert!(s.points().windows(2).all(|w| w[0] < w[1]));
        assert!(Schedule::new(vec![]).is_err());
        // tiny horizons collapse duplicates instead of failing
        let tiny = Schedule::default_for(3).unwrap();
        assert_eq!(tiny.last(), 3);
    }

    #[test]
    fn full_set_has_density_one() {
        let s = TruncatedSet::full(50_000);
        let sched = Schedule::default_for(50_000).unwrap();
        for alpha in [-1.0, -0.5, 0.0, 0.7] {
            let d = upper_alpha_density(&s, alpha, &sched).unwrap();
            assert_eq!(d.value, 1.0);
        }
    }

    #[test]
    fn horizon_and_schedule_errors() {
        let s = TruncatedSet::full(100);
        let sched = Schedule::new(vec![50, 200]).unwrap();
        assert!(matches!(
            upper_alpha_density(&s, 0.0, &sched),
            Err(Error::HorizonTooSmall { .. })
        ));
        assert!(matches!(Schedule::new(vec![]), Err(Error::EmptySchedule)));
    }

    #[test]
    fn squares_decay_to_last_ratio() {
        let n = 1_000_000;
        let squares = TruncatedSet::from_predicate(n, |i| {
            let r = (i as f64).sqrt().round() as usize;
            r * r == i
        });
        let d = upper_alpha_density(&squares, 0.0, &Schedule::default_for(n).unwrap()).unwrap();
        assert!(d.vanishing);
        assert!(d.value <= 0.001, "{}", d.value);
        assert_eq!(d.verdict, Verdict::In);
    }

    #[test]
    fn summable_tail_examples() {
        let n = 1_000_000;
        let powers = TruncatedSet::from_members(n, (0..20).map(|k| 1usize << k)).unwrap();
        let cuts = default_cutpoints(n);
        let t = summable_tail(&powers, &WeightFunction::Reciprocal, &cuts).unwrap();
        assert!(t.tails.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(t.verdict, Verdict::In);

        let all = TruncatedSet::full(n);
        let t = summable_tail(&all, &WeightFunction::Reciprocal, &cuts).unwrap();
        assert_eq!(t.verdict, Verdict::Out);

        let t = summable_tail(&TruncatedSet::empty(n), &WeightFunction::Reciprocal, &cuts).unwrap();
        assert!(t.tails.iter().all(|&x| x == 0.0));
        assert_eq!(t.verdict, Verdict::In);
    }

    #[test]
    fn verdict_is_invariant_under_halving() {
        let t = Thresholds::DENSITY;
        for v in [0.0, 0.001, 0.002, 0.005, 0.01, 0.3] {
            let full = Verdict::classify(v, false, t.in_below, t.out_above);
            let h = t.scaled(0.5);
            assert_eq!(
                full,
                Verdict::classify(v / 2.0, false, h.in_below, h.out_above)
            );
        }
    }
}
