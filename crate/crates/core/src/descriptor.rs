//! Named subsets of the naturals, parsed from short descriptors.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::set::TruncatedSet;
use crate::sieve::lpf_sieve;

#[derive(Debug, Clone, PartialEq)]
pub enum SetDescriptor {
    Naturals,
    Evens,
    Odds,
    Multiples(usize),
    /// `{n : n ≡ r (mod k)}`.
    Residue {
        modulus: usize,
        residue: usize,
    },
    Squares,
    /// `{1, b, b², …}`.
    Powers(usize),
    Primes,
    /// `{n ≥ 2 : lpf(n) = p}`.
    LpfLevel(usize),
    /// Whitespace- or comma-separated integers.
    File(PathBuf),
}

impl fmt::Display for SetDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetDescriptor::Naturals => write!(f, "naturals"),
            SetDescriptor::Evens => write!(f, "evens"),
            SetDescriptor::Odds => write!(f, "odds"),
            SetDescriptor::Multiples(k) => write!(f, "multiples:{k}"),
            SetDescriptor::Residue { modulus, residue } => write!(f, "residue:{modulus}:{residue}"),
            SetDescriptor::Squares => write!(f, "squares"),
            SetDescriptor::Powers(b) => write!(f, "powers:{b}"),
            SetDescriptor::Primes => write!(f, "primes"),
            SetDescriptor::LpfLevel(p) => write!(f, "lpf-level:{p}"),
            SetDescriptor::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl Serialize for SetDescriptor {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromStr for SetDescriptor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let int = |v: &str| -> Result<usize> {
            v.parse()
                .map_err(|_| Error::parse(s, "expected a non-negative integer"))
        };
        let positive = |v: &str| -> Result<usize> {
            match int(v)? {
                0 => Err(Error::parse(s, "must be positive")),
                k => Ok(k),
            }
        };
        let d = match s.split_once(':') {
            None => match s {
                "naturals" | "all" => SetDescriptor::Naturals,
                "evens" => SetDescriptor::Evens,
                "odds" => SetDescriptor::Odds,
                "squares" => SetDescriptor::Squares,
                "primes" => SetDescriptor::Primes,
                _ => {
                    return Err(Error::Unknown {
                        what: "set",
                        name: s.into(),
                    })
                }
            },
            Some(("multiples", k)) => SetDescriptor::Multiples(positive(k)?),
            Some(("residue", rest)) => {
                let (k, r) = rest
                    .split_once(':')
                    .ok_or_else(|| Error::parse(s, "expected residue:<k>:<r>"))?;
                let modulus = positive(k)?;
                let residue = int(r)?;
                if residue >= modulus {
                    return Err(Error::parse(s, "residue must be below the modulus"));
                }
                SetDescriptor::Residue { modulus, residue }
            }
            Some(("powers", b)) => match int(b)? {
                b if b >= 2 => SetDescriptor::Powers(b),
                _ => return Err(Error::parse(s, "base must be at least 2")),
            },
            Some(("lpf-level", p)) => {
                let p = int(p)?;
                if p < 2 || (2..p).take_while(|d| d * d <= p).any(|d| p % d == 0) {
                    return Err(Error::parse(s, "level must be a prime"));
                }
                SetDescriptor::LpfLevel(p)
            }
            Some(("file", path)) => SetDescriptor::File(PathBuf::from(path)),
            _ => {
                return Err(Error::Unknown {
                    what: "set",
                    name: s.into(),
                })
            }
        };
        Ok(d)
    }
}

impl SetDescriptor {
    pub fn build(&self, horizon: usize) -> Result<TruncatedSet> {
        if horizon == 0 {
            return Err(Error::param("set horizon must be at least 1"));
        }
        Ok(match self {
            SetDescriptor::Naturals => TruncatedSet::full(horizon),
            SetDescriptor::Evens => TruncatedSet::from_predicate(horizon, |n| n % 2 == 0),
            SetDescriptor::Odds => TruncatedSet::from_predicate(horizon, |n| n % 2 == 1),
            SetDescriptor::Multiples(k) => TruncatedSet::from_predicate(horizon, |n| n % k == 0),
            SetDescriptor::Residue { modulus, residue } => {
                TruncatedSet::from_predicate(horizon, |n| n % modulus == *residue)
            }
            SetDescriptor::Squares => TruncatedSet::from_members(
                horizon,
                (1..).map(|k: usize| k * k).take_while(|&s| s <= horizon),
            )?,
            SetDescriptor::Powers(b) => TruncatedSet::from_members(
                horizon,
                std::iter::successors(Some(1usize), |p| p.checked_mul(*b))
                    .take_while(|&p| p <= horizon),
            )?,
            SetDescriptor::Primes | SetDescriptor::LpfLevel(_) if horizon < 2 => {
                TruncatedSet::empty(horizon)
            }
            SetDescriptor::Primes => {
                let t = lpf_sieve(horizon)?;
                TruncatedSet::from_predicate(horizon, |n| t.is_prime(n))
            }
            SetDescriptor::LpfLevel(p) => {
                let t = lpf_sieve(horizon)?;
                TruncatedSet::from_predicate(horizon, |n| n >= 2 && t.get(n) as usize == *p)
            }
            SetDescriptor::File(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                let mut members = Vec::new();
                for tok in text
                    .split(|c: char| c.is_whitespace() || c == ',')
                    .filter(|t| !t.is_empty())
                {
                    members.push(
                        tok.parse::<usize>()
                            .map_err(|_| Error::parse(tok, "expected a positive integer"))?,
                    );
                }
                TruncatedSet::from_members(horizon, members)?
            }
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_display() {
        for s in [
            "naturals",
            "evens",
            "odds",
            "multiples:5",
            "residue:6:1",
            "squares",
            "powers:2",
            "primes",
            "lpf-level:7",
        ] {
            assert_eq!(s.parse::<SetDescriptor>().unwrap().to_string(), s);
        }
        assert_eq!(
            "all".parse::<SetDescriptor>().unwrap(),
            SetDescriptor::Naturals
        );
        for bad in [
            "multiples:0",
            "powers:1",
            "lpf-level:9",
            "residue:3:3",
            "cubes",
        ] {
            assert!(bad.parse::<SetDescriptor>().is_err(), "{bad}");
        }
    }

    #[test]
    fn small_sets() {
        let sq = SetDescriptor::Squares.build(50).unwrap();
        assert_eq!(sq.enumeration(), vec![1, 4, 9, 16, 25, 36, 49]);
        let pw = SetDescriptor::Powers(3).build(100).unwrap();
        assert_eq!(pw.enumeration(), vec![1, 3, 9, 27, 81]);
        let l5 = SetDescriptor::LpfLevel(5).build(60).unwrap();
        assert_eq!(l5.enumeration(), vec![5, 25, 35, 55]);
    }
}
