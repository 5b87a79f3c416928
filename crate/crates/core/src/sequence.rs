//! Real-valued sequences `x_1, …, x_N` under study.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sieve::lpf_sieve_cached;

/// What produced a sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SequenceKind {
    /// `x_1 = 1`, `x_n = 1/lpf(n)`.
    Lpf,
    Constant {
        value: f64,
    },
    /// `x_n = limit + 1/n`.
    Convergent {
        limit: f64,
    },
    /// `0, 1, 0, 1, …` starting with `x_1 = 0`.
    Alternating,
    UserFile {
        path: PathBuf,
    },
    /// A subsequence selected from another sequence.
    Restricted {
        parent: Box<SequenceKind>,
        parent_horizon: usize,
    },
}

impl fmt::Display for SequenceKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SequenceKind::Lpf => write!(f, "lpf"),
            SequenceKind::Constant { value } => write!(f, "constant:{value}"),
            SequenceKind::Convergent { limit } => write!(f, "convergent:{limit}"),
            SequenceKind::Alternating => write!(f, "alternating"),
            SequenceKind::UserFile { path } => write!(f, "file:{}", path.display()),
            SequenceKind::Restricted { parent, .. } => write!(f, "{parent}|restricted"),
        }
    }
}

impl FromStr for SequenceKind {
    type Err = Error;

    /// `lpf`, `constant:<c>`, `convergent:<l>`, `alternating`, or `file:<path>`.
    fn from_str(s: &str) -> Result<Self> {
        let number = |v: &str| -> Result<f64> {
            v.parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| Error::parse(s, "expected a finite real"))
        };
        match s.split_once(':') {
            None if s == "lpf" => Ok(SequenceKind::Lpf),
            None if s == "alternating" => Ok(SequenceKind::Alternating),
            Some(("constant", v)) => Ok(SequenceKind::Constant { value: number(v)? }),
            Some(("convergent", v)) => Ok(SequenceKind::Convergent { limit: number(v)? }),
            Some(("file", p)) => Ok(SequenceKind::UserFile {
                path: PathBuf::from(p),
            }),
            _ => Err(Error::Unknown {
                what: "sequence kind",
                name: s.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SequenceSource {
    kind: SequenceKind,
    values: Vec<f64>,
}

impl SequenceSource {
    pub fn from_values(kind: SequenceKind, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySet("sequence"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::param(format!("x_{} is not finite", i + 1)));
        }
        Ok(SequenceSource { kind, values })
    }

    pub fn kind(&self) -> &SequenceKind {
        &self.kind
    }

    pub fn horizon(&self) -> usize {
        self.values.len()
    }

    /// `x_n`, 1-based.
    pub fn get(&self, n: usize) -> f64 {
        self.values[n - 1]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Builds a sequence of the given kind on `[1, horizon]`.
///
/// `horizon` may be `None` only for user files, which then keep every line.
pub fn make_sequence(
    kind: &SequenceKind,
    horizon: Option<usize>,
    cache_dir: Option<&Path>,
) -> Result<SequenceSource> {
    let need = |h: Option<usize>| {
        h.filter(|&n| n >= 1)
            .ok_or_else(|| Error::param("sequence horizon must be at least 1"))
    };
    let values = match kind {
        SequenceKind::Lpf => {
            let n = need(horizon)?;
            let mut values = vec![1.0; n];
            if n >= 2 {
                let table = lpf_sieve_cached(n, cache_dir)?;
                for (i, v) in values.iter_mut().enumerate().skip(1) {
                    *v = 1.0 / table.get(i + 1) as f64;
                }
            }
            values
        }
        SequenceKind::Constant { value } => vec![*value; need(horizon)?],
        SequenceKind::Convergent { limit } => (1..=need(horizon)?)
            .map(|n| limit + 1.0 / n as f64)
            .collect(),
        SequenceKind::Alternating => (1..=need(horizon)?).map(|n| ((n + 1) % 2) as f64).collect(),
        SequenceKind::UserFile { path } => {
            let mut values = read_sequence_file(path)?;
            if let Some(n) = horizon {
                if n > values.len() {
                    return Err(Error::HorizonTooSmall {
                        horizon: values.len(),
                        needed: n,
                    });
                }
                values.truncate(n);
            }
            values
        }
        SequenceKind::Restricted { .. } => {
            return Err(Error::param(
                "restricted sequences are produced by `restrict`, not built directly",
            ))
        }
    };
    SequenceSource::from_values(kind.clone(), values)
}

/// Reads newline-separated reals, or CSV rows `index,value` with indices
/// `1..=N` in any order. Blank lines and a literal `index,value` header are
/// skipped.
pub fn read_sequence_file(path: &Path) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sequence_text(&text).map_err(|e| match e {
        Error::Parse { input, reason } => {
            Error::parse(format!("{}: {input}", path.display()), reason)
        }
        other => other,
    })
}

pub(crate) fn parse_sequence_text(text: &str) -> Result<Vec<f64>> {
    let lines: Vec<&str> = text
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.eq_ignore_ascii_case("index,value"))
        .collect();
    let real = |s: &str, line: &str| -> Result<f64> {
        s.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::parse(line, "expected a finite real"))
    };
    if lines.iter().any(|l| l.contains(',')) {
        let mut indexed = Vec::with_capacity(lines.len());
        for line in &lines {
            let (i, v) = line
                .split_once(',')
                .ok_or_else(|| Error::parse(*line, "expected `index,value`"))?;
            let index: usize = i
                .trim()
                .parse()
                .map_err(|_| Error::parse(*line, "bad index"))?;
            indexed.push((index, real(v, line)?));
        }
        indexed.sort_by_key(|(i, _)| *i);
        for (expected, (index, _)) in indexed.iter().enumerate() {
            if *index != expected + 1 {
                return Err(Error::parse(
                    format!("index {index}"),
                    format!("indices must cover 1..={} exactly once", indexed.len()),
                ));
            }
        }
        Ok(indexed.into_iter().map(|(_, v)| v).collect())
    } else {
        lines.iter().map(|l| real(l, l)).collect()
    }
}
