//! `ideal-limits`: densities, limit points and subsequence experiments from the command line.

mod config;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ideal_limits::density::{upper_weighted_density, Schedule, Verdict};
use ideal_limits::experiment::{
    with_threads, ComparisonParams, ExperimentConfig, ExperimentRegistry, ZeroOneVerdict,
};
use ideal_limits::limits::{analyze, EpsSchedule, GridSpec, DEFAULT_GRID_POINTS};
use ideal_limits::report::Report;
use ideal_limits::{
    make_sequence, run_experiment, IdealSpec, SequenceKind, SetDescriptor, WeightFunction,
};

use config::{parse_list, ConfigFile};

const DEFAULT_HORIZON: usize = 1_000_000;
const DEFAULT_Q: f64 = 0.02;
const DEFAULT_IDEAL: &str = "alpha:0";
const DEFAULT_SAMPLES: usize = 100;
/// Scores this close to `q`, relative to `q`, count as borderline in strict mode.
const BORDERLINE: f64 = 0.1;

const EXIT_USAGE: u8 = 1;
const EXIT_RUNTIME: u8 = 2;
const EXIT_INCONCLUSIVE: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "ideal-limits",
    version,
    about = "Finite-horizon estimates of ideal limit and cluster points"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Global {
    /// Flat `key = value` file; command-line flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for cached sieves (also IDEAL_LIMITS_CACHE).
    #[arg(long, global = true)]
    cache_dir: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Exit with status 3 when the outcome is inconclusive.
    #[arg(long, global = true)]
    strict: bool,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Upper α-density of a named set.
    Density(DensityArgs),
    /// Limit points (Λ) and cluster points (Γ) of a sequence.
    Limits(LimitsArgs),
    /// Monte Carlo experiment over random subsequences.
    Subsample(SubsampleArgs),
}

#[derive(Args, Debug)]
struct DensityArgs {
    /// naturals, evens, odds, multiples:k, residue:k:r, squares, powers:b, primes, lpf-level:p, file:path
    set: String,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<f64>,
    /// Weight instead of an exponent: one, power:a, reciprocal.
    #[arg(long, conflicts_with = "alpha")]
    weight: Option<String>,
    #[arg(long = "N", short = 'N')]
    horizon: Option<usize>,
}

#[derive(Args, Debug)]
struct SequenceArgs {
    /// lpf, constant:c, convergent:l, alternating, file:path
    sequence: String,
    /// Ideal descriptor: alpha:a, erdos-ulam:<weight>, summable:<weight>
    #[arg(long)]
    ideal: Option<String>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long = "N", short = 'N')]
    horizon: Option<usize>,
    /// Comma-separated, strictly decreasing radii.
    #[arg(long)]
    eps: Option<String>,
    #[arg(long)]
    grid_points: Option<usize>,
}

#[derive(Args, Debug)]
struct LimitsArgs {
    #[command(flatten)]
    seq: SequenceArgs,
    /// Γ threshold; defaults to q.
    #[arg(long)]
    gamma_threshold: Option<f64>,
}

#[derive(Args, Debug)]
struct SubsampleArgs {
    #[command(flatten)]
    seq: SequenceArgs,
    #[arg(long)]
    experiment: Option<String>,
    #[arg(long = "M", short = 'M')]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    score_scale: Option<f64>,
    /// Also write one CSV row per sample here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

/// Fully resolved parameters, embedded in every report.
#[derive(Debug, Serialize)]
struct RunConfig {
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    set: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sequence: Option<SequenceKind>,
    horizon: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    weight: Option<WeightFunction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ideal: Option<IdealSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    eps_schedule: Option<EpsSchedule>,
    #[serde(skip_serializing_if = "Option::is_none")]
    grid: Option<GridSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    experiment: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    base_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    comparison: Option<ComparisonParams>,
    strict: bool,
}

impl RunConfig {
    fn new(command: &'static str, horizon: usize, strict: bool) -> Self {
        RunConfig {
            command,
            set: None,
            sequence: None,
            horizon,
            weight: None,
            ideal: None,
            q: None,
            gamma_threshold: None,
            eps_schedule: None,
            grid: None,
            experiment: None,
            samples: None,
            base_seed: None,
            comparison: None,
            strict,
        }
    }
}

struct RunContext {
    file: ConfigFile,
    cache_dir: Option<PathBuf>,
    threads: Option<usize>,
    strict: bool,
    out: Option<PathBuf>,
}

/// Marks errors caused by bad arguments or config values (exit status 1).
#[derive(Debug)]
struct Usage(anyhow::Error);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(Usage(e.into()))
}

/// What a command produced: whether the result was conclusive.
enum Status {
    Conclusive,
    Inconclusive(String),
}

fn emit<C: Serialize, R: Serialize>(out: Option<&Path>, report: &Report<C, R>) -> Result<()> {
    let json = report.to_json()? + "\n";
    match out {
        Some(path) => {
            std::fs::write(path, json).with_context(|| format!("writing {}", path.display()))
        }
        None => std::io::stdout()
            .write_all(json.as_bytes())
            .context("writing to stdout"),
    }
}

fn run_density(ctx: &RunContext, args: DensityArgs) -> Result<Status> {
    let f = &ctx.file;
    let (set, horizon, weight) = (|| -> Result<_> {
        let set: SetDescriptor = args.set.parse()?;
        let horizon = f.resolve(args.horizon, "N", DEFAULT_HORIZON)?;
        let weight = match f.resolve_opt(args.weight, "weight")? {
            Some(w) => w.parse::<WeightFunction>()?,
            None => WeightFunction::power(f.resolve(args.alpha, "alpha", 0.0)?)?,
        };
        Ok((set, horizon, weight))
    })()
    .map_err(usage)?;
    let s = set.build(horizon)?;
    let estimate = upper_weighted_density(&s, &weight, &Schedule::default_for(horizon)?)?;
    let status = match estimate.verdict {
        Verdict::Inconclusive => Status::Inconclusive(format!(
            "density {:.6} is between the verdict thresholds",
            estimate.value
        )),
        _ => Status::Conclusive,
    };
    let mut cfg = RunConfig::new("density", horizon, ctx.strict);
    cfg.set = Some(set.to_string());
    cfg.weight = Some(weight);
    emit(ctx.out.as_deref(), &Report::new(cfg, estimate))?;
    Ok(status)
}

struct Resolved {
    kind: SequenceKind,
    horizon: Option<usize>,
    ideal: IdealSpec,
    q: f64,
    eps: EpsSchedule,
    grid: GridSpec,
}

fn resolve_sequence(f: &ConfigFile, args: SequenceArgs) -> Result<Resolved> {
    let kind: SequenceKind = args.sequence.parse()?;
    let horizon = match (&kind, f.resolve_opt(args.horizon, "N")?) {
        (SequenceKind::UserFile { .. }, n) => n,
        (_, n) => Some(n.unwrap_or(DEFAULT_HORIZON)),
    };
    let ideal = IdealSpec::parse(&f.resolve(args.ideal, "ideal", DEFAULT_IDEAL.to_string())?)?;
    let eps = match f.resolve_opt(args.eps, "eps")? {
        Some(list) => EpsSchedule::new(parse_list(&list)?)?,
        None => EpsSchedule::default(),
    };
    let grid = GridSpec {
        uniform_points: f.resolve(args.grid_points, "grid-points", DEFAULT_GRID_POINTS)?,
        ..GridSpec::default()
    };
    Ok(Resolved {
        kind,
        horizon,
        ideal,
        q: f.resolve(args.q, "q", DEFAULT_Q)?,
        eps,
        grid,
    })
}

fn run_limits(ctx: &RunContext, args: LimitsArgs) -> Result<Status> {
    let f = &ctx.file;
    let gamma_flag = args.gamma_threshold;
    let r = resolve_sequence(f, args.seq).map_err(usage)?;
    let gamma_threshold = f
        .resolve(gamma_flag, "gamma-threshold", r.q)
        .map_err(usage)?;
    let x = make_sequence(&r.kind, r.horizon, ctx.cache_dir.as_deref())?;
    let report = with_threads(ctx.threads, || {
        analyze(&x, &r.ideal, r.q, gamma_threshold, &r.grid, &r.eps)
    })??;
    let borderline: Vec<f64> = report
        .candidates
        .iter()
        .filter(|c| (c.score - r.q).abs() <= BORDERLINE * r.q)
        .map(|c| c.ell)
        .collect();
    let status = if borderline.is_empty() {
        Status::Conclusive
    } else {
        Status::Inconclusive(format!(
            "scores of {borderline:?} are within {}% of q",
            BORDERLINE * 100.0
        ))
    };
    let mut cfg = RunConfig::new("limits", x.horizon(), ctx.strict);
    cfg.sequence = Some(r.kind);
    cfg.ideal = Some(r.ideal);
    cfg.q = Some(r.q);
    cfg.gamma_threshold = Some(gamma_threshold);
    cfg.eps_schedule = Some(r.eps);
    cfg.grid = Some(r.grid);
    emit(ctx.out.as_deref(), &Report::new(cfg, report))?;
    Ok(status)
}

fn run_subsample(ctx: &RunContext, args: SubsampleArgs) -> Result<Status> {
    let f = &ctx.file;
    let registry = ExperimentRegistry::with_builtin();
    let (experiment, samples, seed, comparison, csv, r) = (|| -> Result<_> {
        let experiment = f.resolve(args.experiment, "experiment", "agreement".to_string())?;
        registry.get(&experiment)?;
        let samples = f.resolve(args.samples, "M", DEFAULT_SAMPLES)?;
        let seed = f.resolve(args.seed, "seed", 0)?;
        let defaults = ComparisonParams::default();
        let comparison = ComparisonParams {
            delta: f.resolve(args.delta, "delta", defaults.delta)?,
            score_scale: f.resolve(args.score_scale, "score-scale", defaults.score_scale)?,
        };
        let csv: Option<PathBuf> = f.resolve_opt(args.csv, "csv")?;
        Ok((
            experiment,
            samples,
            seed,
            comparison,
            csv,
            resolve_sequence(f, args.seq)?,
        ))
    })()
    .map_err(usage)?;
    let x = make_sequence(&r.kind, r.horizon, ctx.cache_dir.as_deref())?;

    let mut exp = ExperimentConfig::new(
        &experiment,
        r.kind.clone(),
        x.horizon(),
        r.ideal.clone(),
        r.q,
        samples,
        seed,
    );
    exp.comparison = comparison;
    exp.eps_schedule = r.eps.clone();
    exp.grid = r.grid.clone();
    exp.threads = ctx.threads;
    let result = run_experiment(&x, &exp, &registry)?;

    if let Some(path) = &csv {
        std::fs::write(path, result.to_csv())
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let status = match result.verdict {
        ZeroOneVerdict::Mixed => Status::Inconclusive(format!(
            "agreement fraction {} is neither near 0 nor near 1",
            result.agreement_fraction
        )),
        _ => Status::Conclusive,
    };
    let mut cfg = RunConfig::new("subsample", x.horizon(), ctx.strict);
    cfg.sequence = Some(r.kind);
    cfg.ideal = Some(r.ideal);
    cfg.q = Some(r.q);
    cfg.eps_schedule = Some(r.eps);
    cfg.grid = Some(r.grid);
    cfg.experiment = Some(experiment);
    cfg.samples = Some(samples);
    cfg.base_seed = Some(seed);
    cfg.comparison = Some(comparison);
    emit(ctx.out.as_deref(), &Report::new(cfg, result))?;
    Ok(status)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    let setup = || -> Result<RunContext> {
        let file = match &cli.global.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        Ok(RunContext {
            cache_dir: file.cache_dir(cli.global.cache_dir.clone())?,
            threads: file.resolve_opt(cli.global.threads, "threads")?,
            strict: cli.global.strict || file.get::<bool>("strict")?.unwrap_or(false),
            out: file.resolve_opt(cli.global.out.clone(), "out")?,
            file,
        })
    };
    let ctx = match setup() {
        Ok(ctx) => ctx,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_USAGE);
        }
    };
    let outcome = match cli.command {
        Command::Density(a) => run_density(&ctx, a),
        Command::Limits(a) => run_limits(&ctx, a),
        Command::Subsample(a) => run_subsample(&ctx, a),
    };
    match outcome {
        Ok(Status::Conclusive) => ExitCode::SUCCESS,
        Ok(Status::Inconclusive(why)) => {
            eprintln!("inconclusive: {why}");
            if ctx.strict {
                ExitCode::from(EXIT_INCONCLUSIVE)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<Usage>() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_RUNTIME)
            }
        }
    }
}
