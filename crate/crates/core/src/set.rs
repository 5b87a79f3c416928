//! Truncated subsets of the positive integers.
//!
//! A [`TruncatedSet`] stands in for an infinite set of naturals by keeping its
//! trace on `{1, …, N}`. Membership is a dense bitset; the canonical
//! enumeration `a_1 < a_2 < …` is recovered by scanning it. The set algebra
//! used by the thinnability machinery lives here too: enumeration composition
//! `A_B = {a_b : b ∈ B}`, dilation `kA = {ka : a ∈ A}`, and the pointwise order
//! `X ≤ Y` on canonical enumerations.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq)]
pub struct TruncatedSet {
    horizon: usize,
    // bit n is set iff n is a member; bit 0 is never set
    words: Vec<u64>,
    len: usize,
}

impl std::fmt::Debug for TruncatedSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let head: Vec<usize> = self.iter().take(8).collect();
        f.debug_struct("TruncatedSet")
            .field("horizon", &self.horizon)
            .field("len", &self.len)
            .field("head", &head)
            .finish()
    }
}

impl TruncatedSet {
    pub fn empty(horizon: usize) -> Self {
        TruncatedSet {
            horizon,
            words: vec![0; horizon / 64 + 1],
            len: 0,
        }
    }

    /// All of `{1, …, horizon}`.
    pub fn full(horizon: usize) -> Self {
        Self::from_predicate(horizon, |_| true)
    }

    pub fn from_predicate(horizon: usize, mut keep: impl FnMut(usize) -> bool) -> Self {
        let mut set = Self::empty(horizon);
        for n in 1..=horizon {
            if keep(n) {
                set.words[n >> 6] |= 1 << (n & 63);
                set.len += 1;
            }
        }
        set
    }

    /// Builds a set from arbitrary members; duplicates collapse, members
    /// outside `[1, horizon]` are rejected.
    pub fn from_members(horizon: usize, members: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut set = Self::empty(horizon);
        for n in members {
            if n == 0 || n > horizon {
                return Err(Error::param(format!("member {n} outside [1, {horizon}]")));
            }
            set.insert(n);
        }
        Ok(set)
    }

    /// Like [`from_members`](Self::from_members) but silently drops members
    /// above the horizon and reports how many were dropped.
    pub fn from_members_clipped(
        horizon: usize,
        members: impl IntoIterator<Item = usize>,
    ) -> (Self, usize) {
        let mut set = Self::empty(horizon);
        let mut dropped = 0;
        for n in members {
            if n >= 1 && n <= horizon {
                set.insert(n);
            } else {
                dropped += 1;
            }
        }
        (set, dropped)
    }

    pub(crate) fn insert(&mut self, n: usize) {
        debug_assert!(n >= 1 && n <= self.horizon);
        let word = &mut self.words[n >> 6];
        let bit = 1u64 << (n & 63);
        if *word & bit == 0 {
            *word |= bit;
            self.len += 1;
        }
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, n: usize) -> bool {
        n >= 1 && n <= self.horizon && self.words[n >> 6] & (1 << (n & 63)) != 0
    }

    /// Members in increasing order.
    pub fn iter(&self) -> Members<'_> {
        Members {
            words: &self.words,
            index: 0,
            current: self.words.first().copied().unwrap_or(0),
        }
    }

    /// The canonical enumeration as a vector (`enumeration()[k - 1] = a_k`).
    pub fn enumeration(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.len);
        out.extend(self.iter());
        out
    }

    /// Number of members in `(lo, hi]`.
    pub fn count_in(&self, lo: usize, hi: usize) -> usize {
        let hi = hi.min(self.horizon);
        if hi <= lo {
            return 0;
        }
        self.count_upto(hi) - self.count_upto(lo)
    }

    /// Number of members in `[1, n]`.
    pub fn count_upto(&self, n: usize) -> usize {
        let n = n.min(self.horizon);
        let full = (n + 1) >> 6;
        let mut total: usize = self.words[..full]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum();
        let rem = (n + 1) & 63;
        if rem > 0 {
            total += (self.words[full] & ((1u64 << rem) - 1)).count_ones() as usize;
        }
        total
    }

    pub fn is_subset(&self, other: &TruncatedSet) -> bool {
        self.iter().all(|n| other.contains(n))
    }

    pub fn union(&self, other: &TruncatedSet) -> TruncatedSet {
        self.zip_words(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &TruncatedSet) -> TruncatedSet {
        self.zip_words(other, |a, b| a & b)
    }

    fn zip_words(&self, other: &TruncatedSet, op: impl Fn(u64, u64) -> u64) -> TruncatedSet {
        let horizon = self.horizon.max(other.horizon);
        let mut words = vec![0u64; horizon / 64 + 1];
        for (i, w) in words.iter_mut().enumerate() {
            let a = self.words.get(i).copied().unwrap_or(0);
            let b = other.words.get(i).copied().unwrap_or(0);
            *w = op(a, b);
        }
        let len = words.iter().map(|w| w.count_ones() as usize).sum();
        TruncatedSet {
            horizon,
            words,
            len,
        }
    }

    /// Re-truncates to a new horizon, dropping members above it.
    pub fn with_horizon(&self, horizon: usize) -> TruncatedSet {
        let (set, _) = Self::from_members_clipped(horizon, self.iter());
        set
    }
}

pub struct Members<'a> {
    words: &'a [u64],
    index: usize,
    current: u64,
}

impl Iterator for Members<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        loop {
            if self.current != 0 {
                let bit = self.current.trailing_zeros() as usize;
                self.current &= self.current - 1;
                return Some(self.index * 64 + bit);
            }
            self.index += 1;
            self.current = *self.words.get(self.index)?;
        }
    }
}

/// Result of an operation whose image may leave the horizon.
#[derive(Debug, Clone)]
pub struct Truncation {
    pub set: TruncatedSet,
    /// Elements of the exact image that fell beyond the truncation.
    pub dropped: usize,
}

/// `A_B = {a_b : b ∈ B}`, keeping only indices `b ≤ |A|`.
///
/// The subscript order matters: `compose(b, a)` is the set written `B_A`.
pub fn compose(a: &TruncatedSet, b: &TruncatedSet) -> Result<Truncation> {
    if a.is_empty() {
        return Err(Error::EmptySet("A (enumerated set)"));
    }
    if b.is_empty() {
        return Err(Error::EmptySet("B (index set)"));
    }
    let enumeration = a.enumeration();
    let mut set = TruncatedSet::empty(a.horizon());
    let mut dropped = 0;
    for index in b.iter() {
        match enumeration.get(index - 1) {
            Some(&member) => set.insert(member),
            None => dropped += 1,
        }
    }
    Ok(Truncation { set, dropped })
}

/// `kA = {ka : a ∈ A}` within `A`'s horizon.
pub fn scale(k: usize, a: &TruncatedSet) -> Result<Truncation> {
    if k == 0 {
        return Err(Error::param("scale factor must be at least 1"));
    }
    let (set, dropped) = TruncatedSet::from_members_clipped(a.horizon(), a.iter().map(|m| m * k));
    Ok(Truncation { set, dropped })
}

#[derive(Debug, Clone, Serialize, PartialEq, Eq)]
pub struct Dominance {
    pub holds: bool,
    /// Length of the shared prefix that was compared.
    pub compared: usize,
    /// 1-based position of the first `n` with `x_n > y_n`.
    pub first_violation: Option<usize>,
}

/// Pointwise order `X ≤ Y` on the shared prefix of the canonical enumerations.
pub fn dominates(x: &TruncatedSet, y: &TruncatedSet) -> Result<Dominance> {
    if x.is_empty() {
        return Err(Error::EmptySet("X"));
    }
    if y.is_empty() {
        return Err(Error::EmptySet("Y"));
    }
    let mut compared = 0;
    for (position, (xn, yn)) in x.iter().zip(y.iter()).enumerate() {
        compared += 1;
        if xn > yn {
            return Ok(Dominance {
                holds: false,
                compared,
                first_violation: Some(position + 1),
            });
        }
    }
    Ok(Dominance {
        holds: true,
        compared,
        first_violation: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn multiples(k: usize, n: usize) -> TruncatedSet {
        TruncatedSet::from_predicate(n, |i| i % k == 0)
    }

    #[test]
    fn enumeration_is_sorted_and_counts_match() {
        let s = TruncatedSet::from_members(200, [5, 3, 130, 64, 63, 65, 3]).unwrap();
        assert_eq!(s.enumeration(), vec![3, 5, 63, 64, 65, 130]);
        assert_eq!(s.len(), 6);
        assert_eq!(s.count_upto(64), 4);
        assert_eq!(s.count_in(5, 130), 4);
        assert_eq!(s.count_in(130, 5), 0);
        assert!(TruncatedSet::from_members(10, [0]).is_err());
        assert!(TruncatedSet::from_members(10, [11]).is_err());
    }

    #[test]
    fn empty_set_is_representable() {
        let s = TruncatedSet::empty(100);
        assert!(s.is_empty());
        assert_eq!(s.iter().count(), 0);
        assert_eq!(s.count_upto(100), 0);
    }

    #[test]
    fn compose_identity_and_evens() {
        let all = TruncatedSet::full(1000);
        let b = TruncatedSet::from_members(1000, [2, 7, 19, 800]).unwrap();
        let out = compose(&all, &b).unwrap();
        assert_eq!(out.set, b);
        assert_eq!(out.dropped, 0);

        let evens = multiples(2, 1000);
        let out = compose(&evens, &evens).unwrap();
        // only b <= |A| = 500 contribute
        assert_eq!(out.set, multiples(4, 1000));
        assert_eq!(out.dropped, 250);
    }

    #[test]
    fn compose_rejects_empty_enumeration() {
        let b = multiples(3, 10);
        assert!(compose(&TruncatedSet::empty(10), &b).is_err());
    }

    #[test]
    fn scale_reports_overflow() {
        let a = multiples(2, 100);
        let out = scale(2, &a).unwrap();
        assert_eq!(out.set, multiples(4, 100));
        assert_eq!(out.dropped, 25);
        assert_eq!(scale(1, &a).unwrap().set, a);
        assert!(scale(0, &a).is_err());
    }

    #[test]
    fn dominance_examples() {
        let evens = multiples(2, 300);
        let threes = multiples(3, 300);
        let all = TruncatedSet::full(300);
        assert!(dominates(&evens, &evens).unwrap().holds);
        assert!(dominates(&all, &threes).unwrap().holds);
        assert!(dominates(&evens, &threes).unwrap().holds);
        let d = dominates(&threes, &evens).unwrap();
        assert!(!d.holds);
        assert_eq!(d.first_violation, Some(1));
        assert!(dominates(&TruncatedSet::empty(3), &all).is_err());
    }
}
