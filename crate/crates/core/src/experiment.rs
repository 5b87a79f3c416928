//! Monte Carlo experiments over random subsequences `x↾ω`.
//!
//! Experiments are registered by name. Each sample draws `ω` from seed
//! `base_seed + index`, restricts `x`, re-estimates limit and cluster points,
//! and asks the experiment whether the sample agrees with its criterion.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::density::{upper_alpha_density, Schedule};
use crate::error::{Error, Result};
use crate::ideal::IdealSpec;
use crate::limits::{analyze, EpsSchedule, GridSpec, LimitPointReport};
use crate::omega::{restrict, sample_omega};
use crate::sequence::{SequenceKind, SequenceSource};

pub const DEFAULT_DELTA: f64 = 0.01;
pub const DEFAULT_SCORE_SCALE: f64 = 0.4;
/// Fractions at or below this read as "zero" in the zero-one experiment.
pub const ZERO_BELOW: f64 = 0.05;
/// Fractions at or above this read as "one".
pub const ONE_ABOVE: f64 = 0.95;

/// `sup_{a∈A} inf_{b∈B} |a − b|`; 0 for empty `A`, infinite for empty `B`.
pub fn directed_hausdorff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .map(|p| {
            b.iter()
                .map(|r| (p - r).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

pub fn hausdorff(a: &[f64], b: &[f64]) -> f64 {
    directed_hausdorff(a, b).max(directed_hausdorff(b, a))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ComparisonParams {
    pub delta: f64,
    /// Threshold multiplier for the looser side of a comparison.
    pub score_scale: f64,
}

impl Default for ComparisonParams {
    fn default() -> Self {
        ComparisonParams {
            delta: DEFAULT_DELTA,
            score_scale: DEFAULT_SCORE_SCALE,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Judgement {
    pub agree: bool,
    /// Distance that had to stay within `delta` on each side of the comparison.
    pub forward: f64,
    pub backward: f64,
    /// Points of `Λ(x↾ω, q)` farther than `delta` from `Λ(x, q·score_scale)`.
    pub lemma_violation: bool,
}

/// One Monte Carlo criterion.
pub trait Experiment: Send + Sync {
    fn name(&self) -> &'static str;
    /// Whether the reference sequence itself satisfies the criterion.
    fn reference(&self, x: &LimitPointReport, cmp: &ComparisonParams) -> Judgement;
    fn judge(
        &self,
        x: &LimitPointReport,
        y: &LimitPointReport,
        cmp: &ComparisonParams,
    ) -> Judgement;
}

fn lemma_distance(x: &LimitPointReport, y: &LimitPointReport, cmp: &ComparisonParams) -> f64 {
    let q = x.params.q;
    directed_hausdorff(&y.lambda_at(q), &x.lambda_at(q * cmp.score_scale))
}

/// `Λ(x↾ω) = Λ(x)` up to `delta`, each side read at `q` against the other at
/// `q·score_scale`.
pub struct LambdaAgreement;

impl Experiment for LambdaAgreement {
    fn name(&self) -> &'static str {
        "agreement"
    }

    fn reference(&self, _x: &LimitPointReport, _cmp: &ComparisonParams) -> Judgement {
        Judgement {
            agree: true,
            forward: 0.0,
            backward: 0.0,
            lemma_violation: false,
        }
    }

    fn judge(
        &self,
        x: &LimitPointReport,
        y: &LimitPointReport,
        cmp: &ComparisonParams,
    ) -> Judgement {
        let q = x.params.q;
        let forward = directed_hausdorff(&x.lambda_at(q), &y.lambda_at(q * cmp.score_scale));
        let backward = lemma_distance(x, y, cmp);
        Judgement {
            agree: forward <= cmp.delta && backward <= cmp.delta,
            forward,
            backward,
            lemma_violation: backward > cmp.delta,
        }
    }
}

/// `Λ(x↾ω) = Γ(x↾ω)` up to `delta`, both at threshold `q`.
pub struct LambdaGammaZeroOne;

fn lambda_equals_gamma(r: &LimitPointReport, cmp: &ComparisonParams) -> (bool, f64, f64) {
    let q = r.params.q;
    let lambda = r.lambda_at(q);
    let gamma = r.gamma_at(q);
    let forward = directed_hausdorff(&gamma, &lambda);
    let backward = directed_hausdorff(&lambda, &gamma);
    (
        forward <= cmp.delta && backward <= cmp.delta,
        forward,
        backward,
    )
}

impl Experiment for LambdaGammaZeroOne {
    fn name(&self) -> &'static str {
        "zero-one"
    }

    fn reference(&self, x: &LimitPointReport, cmp: &ComparisonParams) -> Judgement {
        let (agree, forward, backward) = lambda_equals_gamma(x, cmp);
        Judgement {
            agree,
            forward,
            backward,
            lemma_violation: false,
        }
    }

    fn judge(
        &self,
        x: &LimitPointReport,
        y: &LimitPointReport,
        cmp: &ComparisonParams,
    ) -> Judgement {
        let (agree, forward, backward) = lambda_equals_gamma(y, cmp);
        Judgement {
            agree,
            forward,
            backward,
            lemma_violation: lemma_distance(x, y, cmp) > cmp.delta,
        }
    }
}

pub struct ExperimentRegistry {
    entries: BTreeMap<&'static str, Box<dyn Experiment>>,
}

impl Default for ExperimentRegistry {
    fn default() -> Self {
        Self::with_builtin()
    }
}

impl ExperimentRegistry {
    pub fn empty() -> Self {
        ExperimentRegistry {
            entries: BTreeMap::new(),
        }
    }

    pub fn with_builtin() -> Self {
        let mut r = Self::empty();
        r.register(Box::new(LambdaAgreement));
        r.register(Box::new(LambdaGammaZeroOne));
        r
    }

    pub fn register(&mut self, experiment: Box<dyn Experiment>) {
        self.entries.insert(experiment.name(), experiment);
    }

    pub fn get(&self, name: &str) -> Result<&dyn Experiment> {
        self.entries
            .get(name)
            .map(|e| e.as_ref())
            .ok_or_else(|| Error::Unknown {
                what: "experiment",
                name: name.to_string(),
            })
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    pub sequence: SequenceKind,
    pub horizon: usize,
    pub ideal: IdealSpec,
    pub q: f64,
    pub samples: usize,
    pub base_seed: u64,
    pub comparison: ComparisonParams,
    pub eps_schedule: EpsSchedule,
    pub grid: GridSpec,
    /// Worker threads; `None` uses the ambient pool. Never affects results.
    #[serde(skip)]
    pub threads: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(
        experiment: &str,
        sequence: SequenceKind,
        horizon: usize,
        ideal: IdealSpec,
        q: f64,
        samples: usize,
        base_seed: u64,
    ) -> Self {
        ExperimentConfig {
            experiment: experiment.to_string(),
            sequence,
            horizon,
            ideal,
            q,
            samples,
            base_seed,
            comparison: ComparisonParams::default(),
            eps_schedule: EpsSchedule::default(),
            grid: GridSpec::default(),
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleRecord {
    pub index: usize,
    pub seed: u64,
    pub stream: u64,
    pub normality_deviation: f64,
    pub atypical: bool,
    /// Upper density estimate of the selected index set.
    pub selected_density: f64,
    pub subsequence_horizon: usize,
    pub lambda: Vec<f64>,
    pub gamma: Vec<f64>,
    pub judgement: Option<Judgement>,
    pub error: Option<String>,
}

impl SampleRecord {
    pub fn agrees(&self) -> bool {
        self.judgement.as_ref().is_some_and(|j| j.agree)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ZeroOneVerdict {
    Zero,
    One,
    Mixed,
}

impl ZeroOneVerdict {
    pub fn of(fraction: f64) -> Self {
        if fraction <= ZERO_BELOW {
            ZeroOneVerdict::Zero
        } else if fraction >= ONE_ABOVE {
            ZeroOneVerdict::One
        } else {
            ZeroOneVerdict::Mixed
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentResult {
    pub experiment: String,
    pub sample_count: usize,
    pub agreements: usize,
    pub agreement_fraction: f64,
    pub verdict: ZeroOneVerdict,
    pub lemma_violations: usize,
    pub atypical_samples: usize,
    pub failed_samples: usize,
    pub reference_lambda: Vec<f64>,
    pub reference_gamma: Vec<f64>,
    pub reference: Judgement,
    pub samples: Vec<SampleRecord>,
}

impl ExperimentResult {
    /// One row per sample: `seed,deviation,verdict`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("seed,deviation,verdict\n");
        for s in &self.samples {
            let verdict = match (&s.error, s.agrees()) {
                (Some(_), _) => "error",
                (None, true) => "agree",
                (None, false) => "disagree",
            };
            out.push_str(&format!(
                "{},{},{}\n",
                s.seed, s.normality_deviation, verdict
            ));
        }
        out
    }
}

fn run_sample(
    x: &SequenceSource,
    reference: &LimitPointReport,
    experiment: &dyn Experiment,
    config: &ExperimentConfig,
    index: usize,
) -> SampleRecord {
    let seed = config.base_seed.wrapping_add(index as u64);
    let mut record = SampleRecord {
        index,
        seed,
        stream: 0,
        normality_deviation: f64::NAN,
        atypical: false,
        selected_density: f64::NAN,
        subsequence_horizon: 0,
        lambda: Vec::new(),
        gamma: Vec::new(),
        judgement: None,
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let omega = sample_omega(seed, x.horizon())?;
        record.stream = omega.stream;
        record.normality_deviation = omega.normality_deviation;
        record.atypical = omega.atypical;
        record.selected_density =
            upper_alpha_density(&omega.selected, 0.0, &Schedule::default_for(x.horizon())?)?.value;
        let y = restrict(x, &omega)?;
        record.subsequence_horizon = y.horizon();
        let r = analyze(
            &y,
            &config.ideal,
            config.q,
            config.q,
            &config.grid,
            &config.eps_schedule,
        )?;
        record.lambda = r.lambda();
        record.gamma = r.gamma_at(config.q);
        record.judgement = Some(experiment.judge(reference, &r, &config.comparison));
        Ok(())
    })();
    if let Err(e) = outcome {
        record.error = Some(e.to_string());
    }
    record
}

/// Runs `config.samples` samples of the named experiment on `x`.
///
/// The result depends only on `x` and `config` minus `threads`.
pub fn run_experiment(
    x: &SequenceSource,
    config: &ExperimentConfig,
    registry: &ExperimentRegistry,
) -> Result<ExperimentResult> {
    if config.samples == 0 {
        return Err(Error::param("sample count must be at least 1"));
    }
    if x.horizon() != config.horizon {
        return Err(Error::LengthMismatch {
            what: "sequence horizon versus config",
            left: x.horizon(),
            right: config.horizon,
        });
    }
    let experiment = registry.get(&config.experiment)?;
    let body = || -> Result<ExperimentResult> {
        let reference = analyze(
            x,
            &config.ideal,
            config.q,
            config.q,
            &config.grid,
            &config.eps_schedule,
        )?;
        let samples: Vec<SampleRecord> = (0..config.samples)
            .into_par_iter()
            .map(|i| run_sample(x, &reference, experiment, config, i))
            .collect();
        let agreements = samples.iter().filter(|s| s.agrees()).count();
        let fraction = agreements as f64 / samples.len() as f64;
        Ok(ExperimentResult {
            experiment: experiment.name().to_string(),
            sample_count: samples.len(),
            agreements,
            agreement_fraction: fraction,
            verdict: ZeroOneVerdict::of(fraction),
            lemma_violations: samples
                .iter()
                .filter(|s| s.judgement.as_ref().is_some_and(|j| j.lemma_violation))
                .count(),
            atypical_samples: samples.iter().filter(|s| s.atypical).count(),
            failed_samples: samples.iter().filter(|s| s.error.is_some()).count(),
            reference_lambda: reference.lambda(),
            reference_gamma: reference.gamma_at(config.q),
            reference: experiment.reference(&reference, &config.comparison),
            samples,
        })
    };
    with_threads(config.threads, body)?
}

/// Runs `body` on a dedicated pool of `threads` workers, or on the ambient
/// pool when `threads` is `None`.
pub fn with_threads<T: Send>(threads: Option<usize>, body: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(body()),
        Some(t) => Ok(rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::param(format!("thread pool: {e}")))?
            .install(body)),
    }
}
