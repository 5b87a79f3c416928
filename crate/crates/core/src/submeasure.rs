//! Block sequences and the tail norm `‖S‖_φ` of an Erdős–Ulam ideal.
//!
//! For a weight `f` the blocks `(z_n, z_{n+1}]` are chosen so that the mass of
//! each block roughly matches the mass of everything before it. The tail norm
//! is then the limsup of
//!
//! ```text
//! h_n(S) = Σ_{s∈S∩(z_n,z_{n+1}]} f(s) / Σ_{s∈[1,z_{n+1}]} f(s)
//! ```
//!
//! which at finite horizon is read off as the maximum over the upper half of
//! the complete blocks. With unit weights and doubling blocks, a set of
//! asymptotic density `d` has norm `d/2`.

use serde::Serialize;

use crate::density::{
    reliable_floor, upper_alpha_density, Schedule, Thresholds, Verdict, DECAY_RATIO,
};
use crate::error::{Error, Result};
use crate::set::{compose, dominates, TruncatedSet};
use crate::weight::WeightFunction;

pub const DEFAULT_SLACK: f64 = 0.05;
pub const MIN_BLOCKS: usize = 8;

/// Verdict thresholds on the norm scale (half the density scale).
pub const NORM_THRESHOLDS: Thresholds = Thresholds {
    in_below: 0.001,
    out_above: 0.005,
};

#[derive(Debug, Clone, Serialize)]
pub struct BlockSequence {
    weight: WeightFunction,
    horizon: usize,
    slack: f64,
    endpoints: Vec<usize>,
    /// `Σ_{[1, z_i]} f` for every endpoint.
    prefix_mass: Vec<f64>,
    /// Block mass over prefix mass, one entry per complete block.
    ratio_trace: Vec<f64>,
}

impl BlockSequence {
    /// Greedy blocks: `z_0 = 1` and `z_{n+1}` is the least integer whose block
    /// mass reaches `(1 − slack)` times the prefix mass. Fails unless at least
    /// [`MIN_BLOCKS`] complete blocks fit below `horizon`.
    pub fn build(weight: &WeightFunction, horizon: usize, slack: f64) -> Result<Self> {
        Self::build_with_min(weight, horizon, slack, MIN_BLOCKS)
    }

    pub fn build_with_min(
        weight: &WeightFunction,
        horizon: usize,
        slack: f64,
        min_blocks: usize,
    ) -> Result<Self> {
        if !(slack > 0.0 && slack < 0.5) {
            return Err(Error::param(format!(
                "block slack {slack} must lie in (0, 0.5)"
            )));
        }
        if horizon < 2 {
            return Err(Error::param("block horizon must be at least 2"));
        }
        weight.check_range(horizon)?;

        let mut endpoints = vec![1usize];
        let mut prefix_mass = vec![weight.eval(1)];
        let mut ratio_trace = Vec::new();
        let mut prefix = prefix_mass[0];
        let mut block = 0.0;
        for n in 2..=horizon {
            block += weight.eval(n);
            if block >= (1.0 - slack) * prefix {
                ratio_trace.push(block / prefix);
                prefix += block;
                block = 0.0;
                endpoints.push(n);
                prefix_mass.push(prefix);
            }
        }

        let found = ratio_trace.len();
        if found < min_blocks {
            let growth = match endpoints.as_slice() {
                [.., a, b] if *a > 0 => (*b as f64 / *a as f64).max(2.0),
                _ => 2.0,
            };
            let last = *endpoints.last().unwrap() as f64;
            let suggested = (last * growth.powi((min_blocks - found) as i32 + 1)).ceil();
            return Err(Error::TooFewBlocks {
                found,
                needed: min_blocks,
                horizon,
                suggested: if suggested.is_finite() && suggested < usize::MAX as f64 {
                    suggested as usize
                } else {
                    usize::MAX
                },
            });
        }
        Ok(BlockSequence {
            weight: weight.clone(),
            horizon,
            slack,
            endpoints,
            prefix_mass,
            ratio_trace,
        })
    }

    pub fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn slack(&self) -> f64 {
        self.slack
    }

    pub fn endpoints(&self) -> &[usize] {
        &self.endpoints
    }

    pub fn ratio_trace(&self) -> &[f64] {
        &self.ratio_trace
    }

    pub fn block_count(&self) -> usize {
        self.ratio_trace.len()
    }

    pub fn last_endpoint(&self) -> usize {
        *self.endpoints.last().expect("at least one endpoint")
    }

    /// First block of the tail half.
    pub fn tail_start(&self) -> usize {
        self.block_count() / 2
    }

    /// `μ_n = Σ_{[1, z_{n+1}]} f`, the normaliser of block `n`.
    pub fn normalizer(&self, block: usize) -> f64 {
        self.prefix_mass[block + 1]
    }

    /// Index of the block `(z_i, z_{i+1}]` containing `n`.
    pub fn block_of(&self, n: usize) -> Option<usize> {
        if n <= self.endpoints[0] || n > self.last_endpoint() {
            return None;
        }
        Some(self.endpoints.partition_point(|&z| z < n) - 1)
    }

    /// Per-block `f`-mass and member count of `set`.
    pub fn block_masses(&self, set: &TruncatedSet) -> (Vec<f64>, Vec<usize>) {
        let blocks = self.block_count();
        let mut counts = vec![0usize; blocks];
        for (i, c) in counts.iter_mut().enumerate() {
            *c = set.count_in(self.endpoints[i], self.endpoints[i + 1]);
        }
        let masses = if self.weight.is_unit() {
            counts.iter().map(|&c| c as f64).collect()
        } else {
            let mut masses = vec![0.0; blocks];
            for n in set.iter() {
                if n > self.last_endpoint() {
                    break;
                }
                if let Some(b) = self.block_of(n) {
                    masses[b] += self.weight.eval(n);
                }
            }
            masses
        };
        (masses, counts)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct NormEstimate {
    pub value: f64,
    /// `h_n(S)` for every complete block.
    pub block_ratios: Vec<f64>,
    pub block_counts: Vec<usize>,
    /// `μ_n` per block.
    pub mu: Vec<f64>,
    /// `sup_{k≥n} Σ_{S∩(z_k,z_{k+1}]} f / Σ_{[1,z_k]} f` per block, the
    /// un-halved form of the norm.
    pub g_trace: Vec<f64>,
    pub tail_start: usize,
    pub vanishing: bool,
    pub verdict: Verdict,
}

impl NormEstimate {
    pub fn trace(&self) -> &[f64] {
        &self.block_ratios
    }
}

/// Finite-horizon `‖S‖_φ`: the largest block ratio over the tail half.
pub fn norm_estimate(set: &TruncatedSet, blocks: &BlockSequence) -> Result<NormEstimate> {
    if set.horizon() < blocks.last_endpoint() {
        return Err(Error::HorizonTooSmall {
            horizon: set.horizon(),
            needed: blocks.last_endpoint(),
        });
    }
    let (masses, counts) = blocks.block_masses(set);
    let n = masses.len();
    let block_ratios: Vec<f64> = masses
        .iter()
        .enumerate()
        .map(|(i, m)| m / blocks.normalizer(i))
        .collect();
    let mu = (0..n).map(|i| blocks.normalizer(i)).collect();
    let mut g_trace = vec![0.0; n];
    let mut running: f64 = 0.0;
    for i in (0..n).rev() {
        running = running.max(masses[i] / blocks.prefix_mass[i]);
        g_trace[i] = running;
    }

    let tail_start = blocks.tail_start();
    let tail = &block_ratios[tail_start..];
    let value = tail.iter().copied().fold(0.0, f64::max);
    let floor_count = reliable_floor(counts[n - 1]);
    let reliable_peak = tail
        .iter()
        .zip(&counts[tail_start..])
        .filter(|(_, c)| **c >= floor_count)
        .map(|(r, _)| *r)
        .fold(0.0, f64::max);
    let last = *tail.last().expect("at least one tail block");
    let vanishing = reliable_peak > 0.0 && last < DECAY_RATIO * reliable_peak;
    let t = NORM_THRESHOLDS;
    Ok(NormEstimate {
        value,
        block_ratios,
        block_counts: counts,
        mu,
        g_trace,
        tail_start,
        vanishing,
        verdict: Verdict::classify(value, vanishing, t.in_below, t.out_above),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Holds,
    Fails,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize)]
pub struct CompositionCheck {
    /// Estimated asymptotic density of `A`.
    pub density_a: f64,
    /// `⌊1/a⌋ + 1`.
    pub r: Option<usize>,
    pub norm_b: f64,
    /// Norm of `B_A = {b_a : a ∈ A}`.
    pub norm_composed: f64,
    pub dropped: usize,
    pub bound: f64,
    pub outcome: Outcome,
}

/// Checks `‖B_A‖ ≥ ‖B‖/r − slack` with `r = ⌊1/a⌋ + 1`, `a` the density of `A`.
pub fn thinnability_strong_ii_check(
    a: &TruncatedSet,
    b: &TruncatedSet,
    blocks: &BlockSequence,
    slack: f64,
) -> Result<CompositionCheck> {
    let density = upper_alpha_density(a, 0.0, &Schedule::default_for(a.horizon())?)?;
    let norm_b = norm_estimate(b, blocks)?.value;
    if density.verdict != Verdict::Out {
        return Ok(CompositionCheck {
            density_a: density.value,
            r: None,
            norm_b,
            norm_composed: f64::NAN,
            dropped: 0,
            bound: f64::NAN,
            outcome: Outcome::Inconclusive,
        });
    }
    let r = (1.0 / density.value).floor() as usize + 1;
    // B_A: enumerate B along the indices in A
    let composed = compose(b, a)?;
    let norm_composed = norm_estimate(&composed.set, blocks)?.value;
    let bound = norm_b / r as f64 - slack;
    Ok(CompositionCheck {
        density_a: density.value,
        r: Some(r),
        norm_b,
        norm_composed,
        dropped: composed.dropped,
        bound,
        outcome: if norm_composed >= bound {
            Outcome::Holds
        } else {
            Outcome::Fails
        },
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct DominationCheck {
    pub norm_x: f64,
    pub norm_y: f64,
    pub bound: f64,
    pub outcome: Outcome,
}

/// Checks `‖X‖ ≥ ‖Y‖/6 − slack` for `X ≤ Y`.
pub fn thinnability_strong_iii_check(
    x: &TruncatedSet,
    y: &TruncatedSet,
    blocks: &BlockSequence,
    slack: f64,
) -> Result<DominationCheck> {
    let dominance = dominates(x, y)?;
    if let Some(index) = dominance.first_violation {
        let xs = x.iter().nth(index - 1).unwrap_or(0);
        let ys = y.iter().nth(index - 1).unwrap_or(0);
        return Err(Error::DominanceViolated {
            index,
            x: xs,
            y: ys,
        });
    }
    let norm_x = norm_estimate(x, blocks)?.value;
    let norm_y = norm_estimate(y, blocks)?.value;
    let bound = norm_y / 6.0 - slack;
    Ok(DominationCheck {
        norm_x,
        norm_y,
        bound,
        outcome: if norm_x >= bound {
            Outcome::Holds
        } else {
            Outcome::Fails
        },
    })
}
