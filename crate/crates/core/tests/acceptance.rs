//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use ideal_limits::density::{upper_alpha_density, Schedule};
use ideal_limits::diagonal::{diagonal_construct, DiagonalParams};
use ideal_limits::experiment::{run_experiment, ExperimentConfig, ExperimentRegistry, ExperimentResult, ZeroOneVerdict};
use ideal_limits::ideal::{IdealSpec, FAMILY_BLOCK_SLACK};
use ideal_limits::limits::{limit_points_estimate, EpsSchedule, GridSpec};
use ideal_limits::omega::{relative_density, sample_omega};
use ideal_limits::report::Report;
use ideal_limits::sequence::{make_sequence, SequenceKind};
use ideal_limits::set::{compose, dominates, scale, TruncatedSet};
use ideal_limits::sieve::lpf_sieve;
use ideal_limits::submeasure::{
    norm_estimate, thinnability_strong_ii_check, thinnability_strong_iii_check, BlockSequence, Outcome, DEFAULT_SLACK,
};
use ideal_limits::weight::WeightFunction;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);
type Fixture = (&'static str, Box<dyn Fn(usize) -> bool>);

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn density0(set: &TruncatedSet) -> Result<f64, String> {
    let s = Schedule::default_for(set.horizon()).map_err(fail)?;
    Ok(upper_alpha_density(set, 0.0, &s).map_err(fail)?.value)
}

fn c1_density_fixtures() -> Check {
    let n = 1_000_000;
    let mut worst_time = Duration::ZERO;
    for p in [2usize, 3, 5, 7] {
        let t = Instant::now();
        let set = TruncatedSet::from_predicate(n, |k| k % p == 0);
        let d = density0(&set)?;
        let dt = t.elapsed();
        worst_time = worst_time.max(dt);
        ensure((d - 1.0 / p as f64).abs() <= 0.005, format!("multiples of {p}: {d}"))?;
        ensure(dt < Duration::from_secs(1), format!("multiples of {p} took {dt:?}"))?;
    }

    // eventually periodic sets: a periodic pattern with a finite prefix perturbed
    let battery: Vec<Fixture> = vec![
        ("evens", Box::new(|k| k % 2 == 0)),
        ("1 mod 3", Box::new(|k| k % 3 == 1)),
        ("{1,5} mod 6 past 100", Box::new(|k| k > 100 && (k % 6 == 1 || k % 6 == 5))),
        ("multiples of 5 plus [1,50]", Box::new(|k| k <= 50 || k % 5 == 0)),
    ];
    let mut worst = [0.0f64; 3];
    for (ai, (alpha, horizon, tol)) in [(-1.0, 10_000_000usize, 0.05), (-0.5, 1_000_000, 0.01), (0.0, 1_000_000, 0.01)]
        .into_iter()
        .enumerate()
    {
        let schedule = Schedule::default_for(horizon).map_err(fail)?;
        for (name, pred) in &battery {
            let a = TruncatedSet::from_predicate(horizon, pred);
            let da = upper_alpha_density(&a, alpha, &schedule).map_err(fail)?.value;
            for k in 1..=10 {
                let ka = scale(k, &a).map_err(fail)?.set;
                let dk = upper_alpha_density(&ka, alpha, &schedule).map_err(fail)?.value;
                let err = (dk - da / k as f64).abs();
                worst[ai] = worst[ai].max(err);
                ensure(err <= tol, format!("alpha {alpha}, {name}, k={k}: d(kA)={dk}, d(A)/k={}", da / k as f64))?;
            }
        }
    }
    Ok(format!(
        "1/p within 0.005, slowest {worst_time:.2?}; homogeneity worst error a=-1: {:.4}, a=-0.5: {:.4}, a=0: {:.4}",
        worst[0], worst[1], worst[2]
    ))
}

fn c2_level_sets() -> Check {
    let n = 1_000_000;
    let table = lpf_sieve(n).map_err(fail)?;
    let mut product = 1.0;
    let mut worst: f64 = 0.0;
    for p in [2usize, 3, 5, 7, 11, 13] {
        let expected = product / p as f64;
        let set = TruncatedSet::from_predicate(n, |k| k >= 2 && table.get(k) as usize == p);
        let d = density0(&set)?;
        worst = worst.max((d - expected).abs());
        ensure((d - expected).abs() <= 0.005, format!("lpf = {p}: {d} vs {expected}"))?;
        product *= 1.0 - 1.0 / p as f64;
    }
    Ok(format!("p <= 13, worst deviation {worst:.5}"))
}

fn c3_norms() -> Check {
    let n = 1 << 24;
    let blocks = BlockSequence::build(&WeightFunction::ConstantOne, n, FAMILY_BLOCK_SLACK).map_err(fail)?;
    let full = norm_estimate(&TruncatedSet::full(n), &blocks).map_err(fail)?.value;
    let evens = norm_estimate(&TruncatedSet::from_predicate(n, |k| k % 2 == 0), &blocks).map_err(fail)?.value;
    let squares_set = TruncatedSet::from_members(n, (1..=4096).map(|k| k * k)).map_err(fail)?;
    let squares = norm_estimate(&squares_set, &blocks).map_err(fail)?.value;
    ensure((full - 0.5).abs() <= 0.01, format!("||N|| = {full}"))?;
    ensure((evens - 0.25).abs() <= 0.01, format!("||evens|| = {evens}"))?;
    ensure(squares <= 0.01, format!("||squares|| = {squares}"))?;
    let tail = &blocks.ratio_trace()[blocks.tail_start()..];
    let drift = tail.iter().map(|r| (r - 1.0).abs()).fold(0.0, f64::max);
    ensure(drift <= DEFAULT_SLACK, format!("block ratio drift {drift}"))?;
    Ok(format!(
        "||N||={full}, ||evens||={evens}, ||squares||={squares:.5}, {} blocks, tail ratio drift {drift:e}",
        blocks.block_count()
    ))
}

fn c4_thinnability() -> Check {
    let n = 1 << 20;
    let blocks = BlockSequence::build(&WeightFunction::ConstantOne, n, FAMILY_BLOCK_SLACK).map_err(fail)?;
    let evens = TruncatedSet::from_predicate(n, |k| k % 2 == 0);
    let threes = TruncatedSet::from_predicate(n, |k| k % 3 == 0);
    let full = TruncatedSet::full(n);
    let squares = TruncatedSet::from_members(n, (1..=1024).map(|k| k * k)).map_err(fail)?;
    let mut lines = Vec::new();
    for (name, b) in [("N", &full), ("evens", &evens), ("3N", &threes)] {
        let c = thinnability_strong_ii_check(&evens, b, &blocks, 0.02).map_err(fail)?;
        ensure(c.r == Some(3), format!("r = {:?}", c.r))?;
        ensure(
            c.outcome == Outcome::Holds,
            format!("(ii) B={name}: {} < {}", c.norm_composed, c.bound),
        )?;
        lines.push(format!("B={name}: {:.4}>={:.4}", c.norm_composed, c.bound));
    }
    for (name, x, y) in [("(2N,3N)", &evens, &threes), ("(N,squares)", &full, &squares), ("(X,X)", &evens, &evens)] {
        let c = thinnability_strong_iii_check(x, y, &blocks, 0.02).map_err(fail)?;
        ensure(c.outcome == Outcome::Holds, format!("(iii) {name}: {} < {}", c.norm_x, c.bound))?;
        lines.push(format!("{name}: {:.4}>={:.4}", c.norm_x, c.bound));
    }
    Ok(lines.join(", "))
}

fn c5_lpf_limits() -> Check {
    let t = Instant::now();
    let n = 1_000_000;
    let q = 0.02;
    let x = make_sequence(&SequenceKind::Lpf, Some(n), None).map_err(fail)?;
    let eps = EpsSchedule::default();
    let r = limit_points_estimate(&x, &IdealSpec::alpha(0.0).map_err(fail)?, q, &GridSpec::default(), &eps)
        .map_err(fail)?;
    let seventh = 0.5 * (1.0 / 7.0) * 0.5 * (2.0 / 3.0) * (4.0 / 5.0);
    let mut found = Vec::new();
    for (ell, score) in [(0.5, 0.25), (1.0 / 3.0, 1.0 / 12.0), (0.2, 1.0 / 30.0), (1.0 / 7.0, seventh)] {
        let c = r.nearest(ell).ok_or("empty report")?;
        ensure((c.ell - ell).abs() <= 0.005, format!("no candidate near {ell}"))?;
        ensure((c.score - score).abs() <= 0.02, format!("score at {ell}: {} vs {score}", c.score))?;
        found.push(format!("{:.4}:{:.4}", c.ell, c.score));
    }
    let lambda = r.lambda();
    let zero = r.nearest(0.0).ok_or("empty report")?;
    ensure(zero.ell == 0.0, "0 is not a candidate")?;
    ensure(zero.score < q, format!("0 has Lambda score {}", zero.score))?;
    for &e in eps.values() {
        ensure(
            lambda.iter().all(|l| l.abs() > e),
            format!("a Lambda point lies within {e} of 0: {lambda:?}"),
        )?;
    }
    let g = r.gamma.iter().find(|g| g.ell == 0.0).ok_or("0 missing from Gamma")?;
    ensure(g.score >= 0.05, format!("Gamma score of 0 is {}", g.score))?;
    let dt = t.elapsed();
    ensure(dt < Duration::from_secs(30), format!("took {dt:?}"))?;
    Ok(format!(
        "scores {}; 0: Lambda score {}, Gamma score {:.4} at eps {}; Lambda = {lambda:.4?}; {dt:.2?}",
        found.join(" "),
        zero.score,
        g.score,
        g.eps
    ))
}

fn c6_diagonal() -> Check {
    let n = 1_000_000;
    let x = make_sequence(&SequenceKind::Lpf, Some(n), None).map_err(fail)?;
    let evens = TruncatedSet::from_predicate(n, |k| k % 2 == 0);
    let pairs: Vec<_> = (0..64).map(|_| (0.5, evens.clone())).collect();
    let d = diagonal_construct(&x, &pairs, &IdealSpec::alpha(0.0).map_err(fail)?, DiagonalParams::norm(0.2))
        .map_err(fail)?;
    let norm = d.norm.unwrap_or(0.0);
    ensure(norm >= 0.18, format!("norm of A = {norm}"))?;
    ensure(d.envelope_ok, "a completed segment leaves its envelope")?;
    ensure(d.set.is_subset(&evens), "A is not a union of pieces of A_m")?;
    let completed = d.completed_segments().count();

    let pairs: Vec<_> = (0..32).map(|_| (0.5, evens.clone())).collect();
    let s = diagonal_construct(
        &x,
        &pairs,
        &IdealSpec::summable(WeightFunction::Reciprocal),
        DiagonalParams::unit_summable(),
    )
    .map_err(fail)?;
    let masses: Vec<f64> = s.completed_segments().map(|g| g.mass).collect();
    ensure(!masses.is_empty(), "no completed summable segment")?;
    ensure(masses.iter().all(|m| *m >= 1.0), format!("segment masses {masses:?}"))?;
    ensure(s.envelope_ok, "summable subsequence leaves its envelope")?;
    Ok(format!(
        "norm mode: ||A||={norm:.4}, {completed} completed segments; summable: {} segments, masses {:.3?}",
        masses.len(),
        masses
    ))
}

fn run(config: &ExperimentConfig) -> Result<ExperimentResult, String> {
    let x = make_sequence(&config.sequence, Some(config.horizon), None).map_err(fail)?;
    run_experiment(&x, config, &ExperimentRegistry::with_builtin()).map_err(fail)
}

fn c7_monte_carlo() -> Check {
    let n = 1_000_000;
    let mut cfg = ExperimentConfig::new("agreement", SequenceKind::Lpf, n, IdealSpec::alpha(0.0).map_err(fail)?, 0.02, 100, 2024);
    cfg.threads = Some(1);
    let t = Instant::now();
    let r = run(&cfg)?;
    let dt = t.elapsed();
    let worst = r.samples.iter().map(|s| (s.selected_density - 0.5).abs()).fold(0.0, f64::max);
    ensure(worst <= 0.01, format!("selected density off by {worst}"))?;
    ensure(r.agreements >= 95, format!("{} of 100 samples agree", r.agreements))?;
    ensure(r.lemma_violations == 0, format!("{} lemma violations", r.lemma_violations))?;
    ensure(r.failed_samples == 0, format!("{} failed samples", r.failed_samples))?;
    ensure(dt < Duration::from_secs(600), format!("single-threaded run took {dt:?}"))?;
    let mut wide = cfg.clone();
    wide.threads = Some(8);
    let t8 = Instant::now();
    let r8 = run(&wide)?;
    let dt8 = t8.elapsed();
    ensure(dt8 < Duration::from_secs(120), format!("8-thread run took {dt8:?}"))?;
    let same = Report::new(cfg.clone(), &r).body_json().map_err(fail)? == Report::new(wide, &r8).body_json().map_err(fail)?;
    ensure(same, "8-thread results differ from 1-thread results")?;

    // replay each seed on its own and check thinning along a fixed set
    let evens = TruncatedSet::from_predicate(n, |k| k % 2 == 0);
    let mut worst_relative: f64 = 0.0;
    for s in &r.samples {
        let omega = sample_omega(s.seed, n).map_err(fail)?;
        ensure(
            omega.normality_deviation == s.normality_deviation && omega.stream == s.stream,
            format!("seed {} does not replay", s.seed),
        )?;
        let rel = relative_density(&evens, &omega.selected).map_err(fail)?.value;
        worst_relative = worst_relative.max((rel - 0.5).abs());
    }
    ensure(worst_relative <= 0.01, format!("relative density along evens off by {worst_relative}"))?;
    Ok(format!(
        "{} of 100 agree, lemma violations 0, selected density within {worst:.4}, along evens within {worst_relative:.4}, {} atypical, 1 thread {dt:.2?}, 8 threads {dt8:.2?} on {} cpu",
        r.agreements,
        r.atypical_samples,
        std::thread::available_parallelism().map_or(1, |n| n.get())
    ))
}

fn c8_zero_one() -> Check {
    let n = 1_000_000;
    let ideal = IdealSpec::alpha(0.0).map_err(fail)?;
    let mut out = Vec::new();
    for (kind, want) in [
        (SequenceKind::Lpf, ZeroOneVerdict::Zero),
        (SequenceKind::Alternating, ZeroOneVerdict::One),
        (SequenceKind::Convergent { limit: 0.0 }, ZeroOneVerdict::One),
    ] {
        let cfg = ExperimentConfig::new("zero-one", kind.clone(), n, ideal.clone(), 0.02, 100, 11);
        let r = run(&cfg)?;
        let ok = match want {
            ZeroOneVerdict::Zero => r.agreement_fraction <= 0.05,
            _ => r.agreement_fraction == 1.0,
        };
        ensure(ok, format!("{kind}: fraction {}", r.agreement_fraction))?;
        ensure(
            r.reference.agree == (r.verdict == ZeroOneVerdict::One),
            format!("{kind}: Lambda = Gamma on x is {} but verdict {:?}", r.reference.agree, r.verdict),
        )?;
        out.push(format!("{kind}: {}", r.agreement_fraction));
    }
    Ok(out.join(", "))
}

fn random_set(rng: &mut ChaCha8Rng, n: usize, p_num: u64) -> TruncatedSet {
    TruncatedSet::from_predicate(n, |_| rng.next_u64() % 100 < p_num)
}

fn c9_oracles() -> Check {
    let table = lpf_sieve(10_000).map_err(fail)?;
    for k in 2..=10_000usize {
        let trial = (2..=k).find(|d| k % d == 0).expect("k divides itself");
        ensure(table.get(k) as usize == trial, format!("lpf({k})"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut cases = 0;
    for _ in 0..300 {
        let n = 1 + (rng.next_u64() % 1000) as usize;
        let (pa, pb) = (1 + rng.next_u64() % 99, 1 + rng.next_u64() % 99);
        let a = random_set(&mut rng, n, pa);
        let b = random_set(&mut rng, n, pb);
        let ea = a.enumeration();
        let eb = b.enumeration();
        if !a.is_empty() && !b.is_empty() {
            // A_B = {a_b : b ∈ B}
            let brute: Vec<usize> = eb.iter().filter(|&&j| j <= ea.len()).map(|&j| ea[j - 1]).collect();
            let c = compose(&a, &b).map_err(fail)?;
            ensure(c.set.enumeration() == brute, format!("compose at n={n}"))?;
            ensure(c.dropped == eb.len() - brute.len(), "compose drop count")?;

            let k = 1 + (rng.next_u64() % 10) as usize;
            let brute: Vec<usize> = ea.iter().map(|v| v * k).filter(|&v| v <= n).collect();
            ensure(scale(k, &a).map_err(fail)?.set.enumeration() == brute, format!("scale {k} at n={n}"))?;

            let m = ea.len().min(eb.len());
            let violation = (0..m).find(|&i| ea[i] > eb[i]).map(|i| i + 1);
            let d = dominates(&a, &b).map_err(fail)?;
            ensure(d.first_violation == violation && d.holds == violation.is_none(), format!("dominates at n={n}"))?;
            cases += 1;
        }
    }
    Ok(format!("sieve = trial division for n <= 10^4; {cases} random compose/scale/dominates cases exact"))
}

fn c10_determinism() -> Check {
    let cfg = |threads| {
        let mut c = ExperimentConfig::new(
            "agreement",
            SequenceKind::Lpf,
            1_000_000,
            IdealSpec::alpha(0.0).expect("valid"),
            0.02,
            24,
            77,
        );
        c.threads = Some(threads);
        c
    };
    let mut bodies = Vec::new();
    for threads in [1, 8, 1] {
        let c = cfg(threads);
        let r = run(&c)?;
        bodies.push(Report::new(c, r).body_json().map_err(fail)?);
    }
    ensure(bodies[0] == bodies[1], "1-thread and 8-thread reports differ")?;
    ensure(bodies[0] == bodies[2], "repeated 1-thread reports differ")?;
    let zo = |threads| {
        let mut c = ExperimentConfig::new(
            "zero-one",
            SequenceKind::Alternating,
            200_000,
            IdealSpec::alpha(0.0).expect("valid"),
            0.02,
            16,
            5,
        );
        c.threads = Some(threads);
        c
    };
    let a = Report::new(zo(1), run(&zo(1))?).body_json().map_err(fail)?;
    let b = Report::new(zo(8), run(&zo(8))?).body_json().map_err(fail)?;
    ensure(a == b, "zero-one reports differ across thread counts")?;
    Ok(format!("agreement report ({} bytes) and zero-one report identical across 1/8/1 threads", bodies[0].len()))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 density fixtures and homogeneity", c1_density_fixtures),
        ("2 lpf level-set densities", c2_level_sets),
        ("3 submeasure norms at N = 2^24", c3_norms),
        ("4 strong thinnability battery", c4_thinnability),
        ("5 Lambda/Gamma on lpf", c5_lpf_limits),
        ("6 diagonal construction", c6_diagonal),
        ("7 Monte Carlo agreement", c7_monte_carlo),
        ("8 zero-one experiment", c8_zero_one),
        ("9 oracle equivalence", c9_oracles),
        ("10 determinism across threads", c10_determinism),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        match check() {
            Ok(detail) => println!("criterion {name}: PASS ({detail}) [{:.2?}]", t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("criterion {name}: FAIL ({why}) [{:.2?}]", t.elapsed());
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
