//! Ideal families behind a common trait, selectable by name.
//!
//! Every family knows how to measure the "largeness" of a truncated set: the
//! Erdős–Ulam families (`alpha`, `erdos-ulam`) through the block tail norm,
//! the summable family through the share of its `f`-mass that sits in the
//! upper half (log scale) of the horizon. Families are looked up in an
//! [`IdealRegistry`] from descriptors such as `alpha:0`,
//! `erdos-ulam:power:-0.5` or `summable:reciprocal`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde::{Serialize, Serializer};

use crate::density::{summable_tail, upper_weighted_density, Schedule, Verdict};
use crate::error::{Error, Result};
use crate::set::{scale, TruncatedSet};
use crate::submeasure::{norm_estimate, BlockSequence, Outcome};
use crate::weight::WeightFunction;

/// Slack used when families build their own blocks; small enough that unit
/// weights give exact doubling blocks.
pub const FAMILY_BLOCK_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Largeness {
    /// Largeness in `[0, 1]`.
    pub score: f64,
    /// The set's trace decays along the horizon, the finite-horizon signature
    /// of a set that belongs to the ideal despite a visible score.
    pub vanishing: bool,
    pub verdict: Verdict,
}

/// Measures sets on one fixed horizon.
pub trait Gauge: Send + Sync {
    fn horizon(&self) -> usize;
    fn measure(&self, set: &TruncatedSet) -> Result<Largeness>;
}

pub trait IdealFamily: Send + Sync + fmt::Debug {
    /// Registry key.
    fn name(&self) -> &'static str;
    /// Full descriptor, parseable back by the registry.
    fn descriptor(&self) -> String;
    fn weight(&self) -> &WeightFunction;
    /// Norm-scale gauge for sets on `[1, horizon]`.
    fn gauge(&self, horizon: usize) -> Result<Box<dyn Gauge>>;
    /// Density-scale largeness, used by the stretchability check.
    fn density(&self, set: &TruncatedSet) -> Result<Largeness>;
    /// Whether strong thinnability is established for this family.
    fn claims_strong_thinnability(&self) -> bool;
}

struct BlockGauge {
    blocks: BlockSequence,
}

impl Gauge for BlockGauge {
    fn horizon(&self) -> usize {
        self.blocks.horizon()
    }

    fn measure(&self, set: &TruncatedSet) -> Result<Largeness> {
        let est = norm_estimate(set, &self.blocks)?;
        Ok(Largeness {
            score: est.value,
            vanishing: est.vanishing,
            verdict: est.verdict,
        })
    }
}

fn density_largeness(set: &TruncatedSet, weight: &WeightFunction) -> Result<Largeness> {
    let d = upper_weighted_density(set, weight, &Schedule::default_for(set.horizon())?)?;
    Ok(Largeness {
        score: d.value,
        vanishing: d.vanishing,
        verdict: d.verdict,
    })
}

/// `I_α`: sets of zero upper α-density, realised as `E_f` with `f(n) = n^α`.
#[derive(Debug, Clone)]
pub struct AlphaDensity {
    alpha: f64,
    weight: WeightFunction,
}

impl AlphaDensity {
    pub fn new(alpha: f64) -> Result<Self> {
        Ok(AlphaDensity {
            alpha,
            weight: WeightFunction::power(alpha)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

impl IdealFamily for AlphaDensity {
    fn name(&self) -> &'static str {
        "alpha"
    }

    fn descriptor(&self) -> String {
        format!("alpha:{}", self.alpha)
    }

    fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    fn gauge(&self, horizon: usize) -> Result<Box<dyn Gauge>> {
        Ok(Box::new(BlockGauge {
            blocks: BlockSequence::build(&self.weight, horizon, FAMILY_BLOCK_SLACK)?,
        }))
    }

    fn density(&self, set: &TruncatedSet) -> Result<Largeness> {
        density_largeness(set, &self.weight)
    }

    fn claims_strong_thinnability(&self) -> bool {
        (-1.0..=0.0).contains(&self.alpha)
    }
}

/// `E_f` for an eventually non-increasing weight with divergent sum.
#[derive(Debug, Clone)]
pub struct ErdosUlam {
    weight: WeightFunction,
}

impl ErdosUlam {
    pub fn new(weight: WeightFunction) -> Self {
        ErdosUlam { weight }
    }
}

impl IdealFamily for ErdosUlam {
    fn name(&self) -> &'static str {
        "erdos-ulam"
    }

    fn descriptor(&self) -> String {
        format!("erdos-ulam:{}", self.weight)
    }

    fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    fn gauge(&self, horizon: usize) -> Result<Box<dyn Gauge>> {
        self.weight.check_erdos_ulam(horizon)?;
        Ok(Box::new(BlockGauge {
            blocks: BlockSequence::build(&self.weight, horizon, FAMILY_BLOCK_SLACK)?,
        }))
    }

    fn density(&self, set: &TruncatedSet) -> Result<Largeness> {
        self.weight.check_erdos_ulam(set.horizon())?;
        density_largeness(set, &self.weight)
    }

    fn claims_strong_thinnability(&self) -> bool {
        true
    }
}

/// `I_f = {S : Σ_{n∈S} f(n) < ∞}`.
#[derive(Debug, Clone)]
pub struct Summable {
    weight: WeightFunction,
}

impl Summable {
    pub fn new(weight: WeightFunction) -> Self {
        Summable { weight }
    }
}

struct DivergenceGauge {
    weight: WeightFunction,
    horizon: usize,
    cut: usize,
}

impl DivergenceGauge {
    fn measure_set(weight: &WeightFunction, cut: usize, set: &TruncatedSet) -> Result<Largeness> {
        let tail = summable_tail(set, weight, &[0, cut])?;
        Ok(Largeness {
            score: tail.flattening_ratio,
            vanishing: false,
            verdict: tail.verdict,
        })
    }
}

impl Gauge for DivergenceGauge {
    fn horizon(&self) -> usize {
        self.horizon
    }

    /// Share of the set's mass beyond `√N`: near 0 for convergent series,
    /// around one half for mass spread evenly on a log scale.
    fn measure(&self, set: &TruncatedSet) -> Result<Largeness> {
        if set.horizon() < self.horizon {
            return Err(Error::HorizonTooSmall {
                horizon: set.horizon(),
                needed: self.horizon,
            });
        }
        Self::measure_set(&self.weight, self.cut, set)
    }
}

fn root_cut(horizon: usize) -> usize {
    ((horizon as f64).sqrt().floor() as usize).max(1)
}

impl IdealFamily for Summable {
    fn name(&self) -> &'static str {
        "summable"
    }

    fn descriptor(&self) -> String {
        format!("summable:{}", self.weight)
    }

    fn weight(&self) -> &WeightFunction {
        &self.weight
    }

    fn gauge(&self, horizon: usize) -> Result<Box<dyn Gauge>> {
        self.weight.check_range(horizon)?;
        Ok(Box::new(DivergenceGauge {
            weight: self.weight.clone(),
            horizon,
            cut: root_cut(horizon),
        }))
    }

    fn density(&self, set: &TruncatedSet) -> Result<Largeness> {
        DivergenceGauge::measure_set(&self.weight, root_cut(set.horizon()), set)
    }

    fn claims_strong_thinnability(&self) -> bool {
        false
    }
}

type Factory = fn(&str) -> Result<Arc<dyn IdealFamily>>;

struct Entry {
    factory: Factory,
    usage: &'static str,
}

/// Name → constructor table for ideal families.
pub struct IdealRegistry {
    entries: BTreeMap<&'static str, Entry>,
}

impl Default for IdealRegistry {
    fn default() -> Self {
        Self::with_builtin()
    }
}

impl IdealRegistry {
    pub fn empty() -> Self {
        IdealRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn with_builtin() -> Self {
        let mut r = Self::empty();
        r.register("alpha", "alpha:<a>, a >= -1", |arg| {
            let alpha: f64 = arg
                .parse()
                .map_err(|_| Error::parse(arg, "expected a real exponent"))?;
            Ok(Arc::new(AlphaDensity::new(alpha)?))
        });
        r.register("erdos-ulam", "erdos-ulam:<weight>", |arg| {
            Ok(Arc::new(ErdosUlam::new(arg.parse()?)))
        });
        r.register("summable", "summable:<weight>", |arg| {
            Ok(Arc::new(Summable::new(arg.parse()?)))
        });
        r
    }

    pub fn register(&mut self, name: &'static str, usage: &'static str, factory: Factory) {
        self.entries.insert(name, Entry { factory, usage });
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn usage(&self) -> Vec<&'static str> {
        self.entries.values().map(|e| e.usage).collect()
    }

    pub fn parse(&self, descriptor: &str) -> Result<IdealSpec> {
        let (name, arg) = descriptor.split_once(':').unwrap_or((descriptor, ""));
        let entry = self.entries.get(name).ok_or_else(|| Error::Unknown {
            what: "ideal family",
            name: name.to_string(),
        })?;
        Ok(IdealSpec {
            family: (entry.factory)(arg)?,
        })
    }
}

/// A concrete ideal: one family with its parameters.
#[derive(Clone, Debug)]
pub struct IdealSpec {
    family: Arc<dyn IdealFamily>,
}

impl IdealSpec {
    pub fn new(family: Arc<dyn IdealFamily>) -> Self {
        IdealSpec { family }
    }

    /// Parses a descriptor with the built-in registry.
    pub fn parse(descriptor: &str) -> Result<Self> {
        IdealRegistry::with_builtin().parse(descriptor)
    }

    pub fn alpha(alpha: f64) -> Result<Self> {
        Ok(Self::new(Arc::new(AlphaDensity::new(alpha)?)))
    }

    pub fn erdos_ulam(weight: WeightFunction) -> Self {
        Self::new(Arc::new(ErdosUlam::new(weight)))
    }

    pub fn summable(weight: WeightFunction) -> Self {
        Self::new(Arc::new(Summable::new(weight)))
    }

    pub fn family(&self) -> &dyn IdealFamily {
        self.family.as_ref()
    }
}

impl std::ops::Deref for IdealSpec {
    type Target = dyn IdealFamily;

    fn deref(&self) -> &Self::Target {
        self.family.as_ref()
    }
}

impl fmt::Display for IdealSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.family.descriptor())
    }
}

impl Serialize for IdealSpec {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct StretchRow {
    pub k: usize,
    pub density: f64,
    /// `d(A)/k`.
    pub expected: f64,
    pub dropped: usize,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Serialize)]
pub struct StretchReport {
    pub ideal: IdealSpec,
    pub base: Largeness,
    pub slack: f64,
    pub rows: Vec<StretchRow>,
    pub outcome: Outcome,
}

/// For each `k`, checks that `kA` keeps density at least `(1 − slack)·d(A)/k`.
pub fn stretchability_check(
    a: &TruncatedSet,
    ideal: &IdealSpec,
    ks: &[usize],
    slack: f64,
) -> Result<StretchReport> {
    let base = ideal.density(a)?;
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let image = scale(k, a)?;
        let expected = base.score / k as f64;
        let (density, outcome) = if base.verdict != Verdict::Out {
            (f64::NAN, Outcome::Inconclusive)
        } else {
            let d = ideal.density(&image.set)?.score;
            (
                d,
                if d >= expected * (1.0 - slack) {
                    Outcome::Holds
                } else {
                    Outcome::Fails
                },
            )
        };
        rows.push(StretchRow {
            k,
            density,
            expected,
            dropped: image.dropped,
            outcome,
        });
    }
    let outcome = if rows.iter().any(|r| r.outcome == Outcome::Fails) {
        Outcome::Fails
    } else if rows.iter().all(|r| r.outcome == Outcome::Holds) {
        Outcome::Holds
    } else {
        Outcome::Inconclusive
    };
    Ok(StretchReport {
        ideal: ideal.clone(),
        base,
        slack,
        rows,
        outcome,
    })
}
