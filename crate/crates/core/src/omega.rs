//! Random subsequences via dyadic digits.
//!
//! A point `ω ∈ (0, 1]` with digits `d_1 d_2 …` selects the subsequence of `x`
//! that keeps `x_i` exactly when `d_i = 1`. Digits come from ChaCha8 seeded
//! with [`ChaCha8Rng::seed_from_u64`]; each `next_u64` supplies 64 digits,
//! least significant bit first.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::density::{upper_alpha_density, DensityEstimate, Schedule};
use crate::error::{Error, Result};
use crate::sequence::{SequenceKind, SequenceSource};
use crate::set::TruncatedSet;

/// Deviations beyond this many binomial standard deviations are flagged.
pub const ATYPICAL_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OmegaSample {
    pub seed: u64,
    /// ChaCha stream the digits were drawn from; above 0 only after an
    /// all-zero draw was rejected.
    pub stream: u64,
    #[serde(skip)]
    pub selected: TruncatedSet,
    pub normality_deviation: f64,
    pub atypical: bool,
}

impl OmegaSample {
    pub fn horizon(&self) -> usize {
        self.selected.horizon()
    }

    /// `d_i`, 1-based.
    pub fn digit(&self, i: usize) -> bool {
        self.selected.contains(i)
    }

    pub fn digits(&self) -> Vec<u8> {
        (1..=self.horizon()).map(|i| self.digit(i) as u8).collect()
    }

    /// Wraps a given selection, e.g. a forced digit pattern.
    pub fn from_selection(seed: u64, selected: TruncatedSet) -> Result<Self> {
        let n = selected.horizon();
        if n == 0 {
            return Err(Error::param("ω needs at least one digit"));
        }
        let deviation = (selected.len() as f64 / n as f64 - 0.5).abs();
        Ok(OmegaSample {
            seed,
            stream: 0,
            normality_deviation: deviation,
            atypical: deviation > ATYPICAL_SIGMAS * 0.5 / (n as f64).sqrt(),
            selected,
        })
    }
}

fn draw(seed: u64, stream: u64, horizon: usize) -> TruncatedSet {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let mut set = TruncatedSet::empty(horizon);
    let mut i = 1;
    while i <= horizon {
        let word = rng.next_u64();
        for bit in 0..64.min(horizon - i + 1) {
            if word >> bit & 1 == 1 {
                set.insert(i + bit);
            }
        }
        i += 64;
    }
    set
}

/// Fair-coin digits `d_1 … d_N` for `seed`. An all-zero draw is replaced by a
/// draw from the next stream.
pub fn sample_omega(seed: u64, horizon: usize) -> Result<OmegaSample> {
    if horizon == 0 {
        return Err(Error::param("ω needs at least one digit"));
    }
    let mut stream = 0;
    loop {
        let selected = draw(seed, stream, horizon);
        if !selected.is_empty() {
            let mut s = OmegaSample::from_selection(seed, selected)?;
            s.stream = stream;
            return Ok(s);
        }
        stream += 1;
    }
}

/// `x↾ω`: the terms `x_i` with `d_i = 1`, in order.
pub fn restrict(x: &SequenceSource, omega: &OmegaSample) -> Result<SequenceSource> {
    if omega.horizon() != x.horizon() {
        return Err(Error::LengthMismatch {
            what: "digits versus sequence",
            left: omega.horizon(),
            right: x.horizon(),
        });
    }
    if omega.selected.is_empty() {
        return Err(Error::EmptySet("subsequence selection"));
    }
    let values = omega.selected.iter().map(|i| x.get(i)).collect();
    SequenceSource::from_values(
        SequenceKind::Restricted {
            parent: Box::new(x.kind().clone()),
            parent_horizon: x.horizon(),
        },
        values,
    )
}

/// Density of `K = {k : a_k ∈ B}` along the enumeration of `A`.
pub fn relative_density(a: &TruncatedSet, b: &TruncatedSet) -> Result<DensityEstimate> {
    if a.is_empty() {
        return Err(Error::EmptySet("reference set"));
    }
    let enumeration = a.enumeration();
    let k = TruncatedSet::from_predicate(enumeration.len(), |i| b.contains(enumeration[i - 1]));
    upper_alpha_density(&k, 0.0, &Schedule::default_for(k.horizon())?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::make_sequence;

    #[test]
    fn same_seed_same_digits() {
        let a = sample_omega(7, 10_000).unwrap();
        let b = sample_omega(7, 10_000).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.selected, sample_omega(8, 10_000).unwrap().selected);
        // a prefix of a longer draw is the shorter draw
        let long = sample_omega(7, 20_000).unwrap();
        assert_eq!(long.selected.with_horizon(10_000), a.selected);
    }

    #[test]
    fn single_digit_never_all_zero() {
        for seed in 0..64 {
            let s = sample_omega(seed, 1).unwrap();
            assert!(s.digit(1));
        }
    }

    #[test]
    fn restrict_by_evens() {
        let x = make_sequence(&SequenceKind::Lpf, Some(20), None).unwrap();
        let evens = TruncatedSet::from_predicate(20, |n| n % 2 == 0);
        let y = restrict(&x, &OmegaSample::from_selection(0, evens).unwrap()).unwrap();
        assert_eq!(y.values(), &[0.5; 10]);
        let all = OmegaSample::from_selection(0, TruncatedSet::full(20)).unwrap();
        assert_eq!(restrict(&x, &all).unwrap().values(), x.values());
    }

    #[test]
    fn relative_density_of_fours_in_evens() {
        let n = 1_000_000;
        let evens = TruncatedSet::from_predicate(n, |k| k % 2 == 0);
        let fours = TruncatedSet::from_predicate(n, |k| k % 4 == 0);
        let d = relative_density(&evens, &fours).unwrap();
        assert!((d.value - 0.5).abs() <= 0.01);
        assert_eq!(
            relative_density(&evens, &TruncatedSet::full(n))
                .unwrap()
                .value,
            1.0
        );
        assert!(relative_density(&TruncatedSet::empty(n), &fours).is_err());
    }
}
