use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A positive weight `f : N → (0, ∞)`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightFunction {
    ConstantOne,
    /// `f(n) = n^α`, `α ≥ −1`.
    Power(f64),
    /// `f(n) = 1/n`.
    Reciprocal,
    /// `f(n) = table[n − 1]`; only defined up to the table length.
    Table(Vec<f64>),
}

impl WeightFunction {
    pub fn power(alpha: f64) -> Result<Self> {
        if !(alpha >= -1.0) || !alpha.is_finite() {
            return Err(Error::param(format!(
                "power exponent {alpha} must be finite and >= -1"
            )));
        }
        Ok(WeightFunction::Power(alpha))
    }

    pub fn table(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::param("weight table is empty"));
        }
        if let Some(bad) = values.iter().find(|v| !(**v > 0.0) || !v.is_finite()) {
            return Err(Error::param(format!(
                "weight table entry {bad} is not a positive real"
            )));
        }
        Ok(WeightFunction::Table(values))
    }

    #[inline]
    pub fn eval(&self, n: usize) -> f64 {
        match self {
            WeightFunction::ConstantOne => 1.0,
            WeightFunction::Power(alpha) => (n as f64).powf(*alpha),
            WeightFunction::Reciprocal => 1.0 / n as f64,
            WeightFunction::Table(values) => values[n - 1],
        }
    }

    /// True when every `f(n)` equals one, which lets callers count instead of sum.
    pub fn is_unit(&self) -> bool {
        matches!(self, WeightFunction::ConstantOne)
            || matches!(self, WeightFunction::Power(a) if *a == 0.0)
    }

    /// Checks that `f` is defined and positive on `[1, horizon]`.
    pub fn check_range(&self, horizon: usize) -> Result<()> {
        if let WeightFunction::Table(values) = self {
            if values.len() < horizon {
                return Err(Error::param(format!(
                    "weight table has {} entries but horizon is {horizon}",
                    values.len()
                )));
            }
        }
        Ok(())
    }

    /// Finite-horizon sanity check for Erdős–Ulam use: `f` non-increasing on
    /// the upper half of the horizon and the partial sums still growing there.
    pub fn check_erdos_ulam(&self, horizon: usize) -> Result<()> {
        self.check_range(horizon)?;
        if horizon < 4 {
            return Err(Error::param("horizon too small to check divergence"));
        }
        let half = horizon / 2;
        let mut lower = 0.0;
        for n in 1..=half {
            lower += self.eval(n);
        }
        let mut upper = 0.0;
        let mut previous = self.eval(half);
        for n in half + 1..=horizon {
            let v = self.eval(n);
            if v > previous * (1.0 + 1e-12) {
                return Err(Error::param(format!(
                    "weight {self} increases at n = {n}; Erdős–Ulam weights must be eventually non-increasing"
                )));
            }
            previous = v;
            upper += v;
        }
        if upper < 1e-3 * lower {
            return Err(Error::param(format!(
                "partial sums of {self} plateau by horizon {horizon}; the series looks convergent"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for WeightFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFunction::ConstantOne => write!(f, "one"),
            WeightFunction::Power(a) => write!(f, "power:{a}"),
            WeightFunction::Reciprocal => write!(f, "reciprocal"),
            WeightFunction::Table(v) => write!(f, "table[{}]", v.len()),
        }
    }
}

impl Serialize for WeightFunction {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl FromStr for WeightFunction {
    type Err = Error;

    /// `one`, `power:<alpha>`, `reciprocal`, or `table:<v1>,<v2>,…`.
    fn from_str(s: &str) -> Result<Self> {
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h, Some(a)),
            None => (s, None),
        };
        match (head, arg) {
            ("one" | "constant" | "constant-one", None) => Ok(WeightFunction::ConstantOne),
            ("reciprocal", None) => Ok(WeightFunction::Reciprocal),
            ("power", Some(a)) => {
                let alpha: f64 = a.parse().map_err(|_| Error::parse(s, "bad exponent"))?;
                WeightFunction::power(alpha)
            }
            ("table", Some(list)) => {
                let values = list
                    .split(',')
                    .map(|v| v.trim().parse::<f64>())
                    .collect::<std::result::Result<Vec<_>, _>>()
                    .map_err(|_| Error::parse(s, "bad table entry"))?;
                WeightFunction::table(values)
            }
            _ => Err(Error::Unknown {
                what: "weight",
                name: s.to_string(),
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluation() {
        assert_eq!(WeightFunction::ConstantOne.eval(17), 1.0);
        assert_eq!(WeightFunction::Power(2.0).eval(3), 9.0);
        assert_eq!(WeightFunction::Power(0.0).eval(3), 1.0);
        assert_eq!(WeightFunction::Reciprocal.eval(4), 0.25);
        assert_eq!(WeightFunction::table(vec![3.0, 2.0]).unwrap().eval(2), 2.0);
        assert!(WeightFunction::power(-1.5).is_err());
        assert!(WeightFunction::table(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn parse_round_trip() {
        for s in ["one", "reciprocal", "power:-0.5"] {
            let w: WeightFunction = s.parse().unwrap();
            assert_eq!(w.to_string(), s);
        }
        assert!("power:x".parse::<WeightFunction>().is_err());
        assert!("cubic".parse::<WeightFunction>().is_err());
    }

    #[test]
    fn erdos_ulam_check() {
        assert!(WeightFunction::Reciprocal.check_erdos_ulam(10_000).is_ok());
        assert!(WeightFunction::ConstantOne.check_erdos_ulam(10_000).is_ok());
        assert!(WeightFunction::Power(0.5).check_erdos_ulam(10_000).is_err());
        let summable =
            WeightFunction::table((1..=10_000).map(|n| 1.0 / (n as f64).powi(3)).collect())
                .unwrap();
        assert!(summable.check_erdos_ulam(10_000).is_err());
    }
}
