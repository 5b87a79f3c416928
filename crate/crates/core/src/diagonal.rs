//! Diagonal gluing of index sets along a convergent sequence of limit points.
//!
//! Given pairs `(ℓ_m, A_m)` the construction picks cut points
//! `0 = θ_0 < θ_1 < …` and returns `A = ⋃_m A_m ∩ (θ_{m−1}, θ_m]`. Each `θ_m`
//! is the least integer past both `θ_{m−1}` and `max(A_{m+1} ∖ B_{m+1})`, with
//! `B_m = {n : |x_n − ℓ_m| ≤ 1/m}`, at which the current segment meets its
//! mass criterion. A finite list of pairs is continued by repeating its last
//! pair until the horizon runs out.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ideal::{IdealSpec, FAMILY_BLOCK_SLACK};
use crate::limits::neighborhood_index_set;
use crate::sequence::SequenceSource;
use crate::set::TruncatedSet;
use crate::submeasure::BlockSequence;

/// Default tolerance for the Cauchy check on the tail of `ℓ_m`.
pub const DEFAULT_CAUCHY_TOLERANCE: f64 = 0.05;
/// Default slack on the final norm check.
pub const DEFAULT_NORM_SLACK: f64 = 0.02;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MassCriterion {
    /// Segment `m` needs block-submeasure at least `q − 1/m`.
    Norm,
    /// Segment `m` needs `f`-mass at least 1.
    UnitSummable,
}

#[derive(Debug, Clone, Serialize)]
pub struct Segment {
    pub m: usize,
    /// `(lo, hi]`; `hi` is `θ_m`, or the horizon for an unfinished segment.
    pub lo: usize,
    pub hi: usize,
    pub ell_m: f64,
    /// Block submeasure (norm mode) or `f`-mass (summable mode) of the piece.
    pub mass: f64,
    pub target: f64,
    pub members: usize,
    pub completed: bool,
    /// `1/m + |ℓ_m − ℓ|`.
    pub envelope: f64,
    /// Largest `|x_n − ℓ|` over the piece.
    pub max_deviation: f64,
    pub within_envelope: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagonalConstruction {
    pub criterion: MassCriterion,
    pub q: f64,
    pub limit: f64,
    /// `θ_0, θ_1, …` for completed segments.
    pub thetas: Vec<usize>,
    pub segments: Vec<Segment>,
    #[serde(skip)]
    pub set: TruncatedSet,
    pub members: usize,
    /// Norm of `A` (norm mode only).
    pub norm: Option<f64>,
    pub norm_slack: f64,
    /// The horizon ran out before the last segment met its criterion.
    pub incomplete: bool,
    pub cauchy_spread: f64,
    /// Postcondition (a).
    pub mass_ok: bool,
    /// Postcondition (b), over completed segments.
    pub envelope_ok: bool,
}

impl DiagonalConstruction {
    pub fn completed_segments(&self) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(|s| s.completed)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct DiagonalParams {
    pub q: f64,
    pub criterion: MassCriterion,
    pub cauchy_tolerance: f64,
    pub norm_slack: f64,
}

impl DiagonalParams {
    pub fn norm(q: f64) -> Self {
        DiagonalParams {
            q,
            criterion: MassCriterion::Norm,
            cauchy_tolerance: DEFAULT_CAUCHY_TOLERANCE,
            norm_slack: DEFAULT_NORM_SLACK,
        }
    }

    pub fn unit_summable() -> Self {
        DiagonalParams {
            q: 1.0,
            criterion: MassCriterion::UnitSummable,
            cauchy_tolerance: DEFAULT_CAUCHY_TOLERANCE,
            norm_slack: DEFAULT_NORM_SLACK,
        }
    }
}

/// Spread of the second half of `ells`.
fn cauchy_spread(ells: &[f64]) -> f64 {
    let tail = &ells[ells.len() / 2..];
    let hi = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = tail.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

pub fn diagonal_construct(
    x: &SequenceSource,
    pairs: &[(f64, TruncatedSet)],
    ideal: &IdealSpec,
    params: DiagonalParams,
) -> Result<DiagonalConstruction> {
    if pairs.is_empty() {
        return Err(Error::EmptySet("diagonal input pairs"));
    }
    let horizon = x.horizon();
    if let Some((_, a)) = pairs.iter().find(|(_, a)| a.horizon() != horizon) {
        return Err(Error::LengthMismatch {
            what: "index set horizon",
            left: a.horizon(),
            right: horizon,
        });
    }
    if params.criterion == MassCriterion::Norm && !(params.q > 0.0) {
        return Err(Error::param(format!("q = {} must be positive", params.q)));
    }
    let ells: Vec<f64> = pairs.iter().map(|(l, _)| *l).collect();
    let spread = cauchy_spread(&ells);
    if !(spread <= params.cauchy_tolerance) {
        return Err(Error::NotCauchy {
            spread,
            tolerance: params.cauchy_tolerance,
        });
    }
    let limit = *ells.last().expect("non-empty");
    let weight = ideal.weight().clone();
    let blocks = match params.criterion {
        MassCriterion::Norm => Some(BlockSequence::build(&weight, horizon, FAMILY_BLOCK_SLACK)?),
        MassCriterion::UnitSummable => None,
    };

    // max(A_m ∖ B_m)
    let pair = |m: usize| &pairs[(m - 1).min(pairs.len() - 1)];
    let bad_max = |m: usize| -> Result<usize> {
        let (ell, a) = pair(m);
        let b = neighborhood_index_set(x, *ell, 1.0 / m as f64)?;
        Ok(a.iter().filter(|n| !b.contains(*n)).last().unwrap_or(0))
    };

    let mut set = TruncatedSet::empty(horizon);
    let mut thetas = vec![0usize];
    let mut segments = Vec::new();
    let mut incomplete = false;
    for m in 1.. {
        let (ell_m, a) = pair(m);
        let lo = *thetas.last().expect("θ_0");
        if lo >= horizon {
            break;
        }
        let floor = bad_max(m + 1)?.max(lo);
        let target = match params.criterion {
            MassCriterion::Norm => params.q - 1.0 / m as f64,
            MassCriterion::UnitSummable => 1.0,
        };
        let mut mass = 0.0;
        let mut hi = None;
        let mut n = lo + 1;
        // running block-submeasure of the piece: best complete block ratio and the current block's partial mass
        let mut current: Option<(usize, f64)> = None;
        let mut best: f64 = 0.0;
        while n <= horizon {
            if a.contains(n) {
                match &blocks {
                    Some(b) => {
                        if let Some(k) = b.block_of(n) {
                            let w = weight.eval(n);
                            current = match current {
                                Some((ck, cm)) if ck == k => Some((k, cm + w)),
                                _ => Some((k, w)),
                            };
                            let (ck, cm) = current.expect("just set");
                            best = best.max(cm / b.normalizer(ck));
                        }
                        mass = best;
                    }
                    None => mass += weight.eval(n),
                }
            }
            if n > floor && (mass >= target || target <= 0.0) {
                hi = Some(n);
                break;
            }
            n += 1;
        }
        let completed = hi.is_some();
        let hi = hi.unwrap_or(horizon);
        let envelope = 1.0 / m as f64 + (ell_m - limit).abs();
        let mut members = 0;
        let mut max_deviation: f64 = 0.0;
        for k in a.iter().skip_while(|&k| k <= lo).take_while(|&k| k <= hi) {
            set.insert(k);
            members += 1;
            max_deviation = max_deviation.max((x.get(k) - limit).abs());
        }
        segments.push(Segment {
            m,
            lo,
            hi,
            ell_m: *ell_m,
            mass,
            target,
            members,
            completed,
            envelope,
            max_deviation,
            within_envelope: max_deviation <= envelope + 1e-12,
        });
        if !completed {
            incomplete = true;
            break;
        }
        thetas.push(hi);
    }

    let norm = match params.criterion {
        MassCriterion::Norm => Some(ideal.gauge(horizon)?.measure(&set)?.score),
        MassCriterion::UnitSummable => None,
    };
    let mass_ok = match params.criterion {
        MassCriterion::Norm => norm.unwrap_or(0.0) >= params.q - params.norm_slack,
        MassCriterion::UnitSummable => segments
            .iter()
            .filter(|s| s.completed)
            .all(|s| s.mass >= 1.0),
    };
    let envelope_ok = segments
        .iter()
        .filter(|s| s.completed)
        .all(|s| s.within_envelope);
    Ok(DiagonalConstruction {
        criterion: params.criterion,
        q: params.q,
        limit,
        thetas,
        members: set.len(),
        set,
        segments,
        norm,
        norm_slack: params.norm_slack,
        incomplete,
        cauchy_spread: spread,
        mass_ok,
        envelope_ok,
    })
}
