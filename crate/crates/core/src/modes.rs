use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Largest mode set accepted; matrices are dense `2^n x 2^n`.
pub const MAX_MODES: usize = 10;

/// An ordered finite set of global mode labels.
///
/// The increasing order of the labels fixes the Jordan-Wigner ordering of
/// every operator built over the set. The empty set stands for the scalar
/// algebra (1x1 matrices).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct ModeSet(Vec<u32>);

impl ModeSet {
    pub fn new(indices: Vec<u32>) -> Result<Self> {
        if indices.first() == Some(&0) || indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidModeSet(indices));
        }
        if indices.len() > MAX_MODES {
            return Err(Error::TooManyModes(indices.len()));
        }
        Ok(Self(indices))
    }

    /// Sorts and deduplicates before validating.
    pub fn from_unsorted(mut indices: Vec<u32>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        Self::new(indices)
    }

    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Matrix size `2^|I|`.
    pub fn dim(&self) -> usize {
        1 << self.0.len()
    }

    pub fn indices(&self) -> &[u32] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        self.0.iter().copied()
    }

    /// 0-based position of `mode` in the Jordan-Wigner ordering.
    pub fn position(&self, mode: u32) -> Option<usize> {
        self.0.binary_search(&mode).ok()
    }

    pub fn contains(&self, mode: u32) -> bool {
        self.position(mode).is_some()
    }

    pub fn is_subset_of(&self, other: &ModeSet) -> bool {
        self.iter().all(|m| other.contains(m))
    }

    pub fn is_disjoint(&self, other: &ModeSet) -> bool {
        self.iter().all(|m| !other.contains(m))
    }

    pub fn union(&self, other: &ModeSet) -> Result<ModeSet> {
        Self::from_unsorted(self.iter().chain(other.iter()).collect())
    }

    /// Positions of the modes of `self` inside `sup`.
    pub fn positions_in(&self, sup: &ModeSet) -> Result<Vec<usize>> {
        self.iter()
            .map(|m| {
                sup.position(m).ok_or_else(|| Error::NotSubset {
                    sub: self.clone(),
                    sup: sup.clone(),
                })
            })
            .collect()
    }
}

/// Union of pairwise-disjoint mode sets; fails on any overlap.
pub fn disjoint_union<'a>(sets: impl IntoIterator<Item = &'a ModeSet>) -> Result<ModeSet> {
    let sets: Vec<&ModeSet> = sets.into_iter().collect();
    for (i, a) in sets.iter().enumerate() {
        for b in &sets[i + 1..] {
            if !a.is_disjoint(b) {
                return Err(Error::Overlapping((*a).clone(), (*b).clone()));
            }
        }
    }
    ModeSet::from_unsorted(sets.iter().flat_map(|s| s.iter()).collect())
}

impl fmt::Display for ModeSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

impl TryFrom<Vec<u32>> for ModeSet {
    type Error = Error;

    fn try_from(v: Vec<u32>) -> Result<Self> {
        Self::new(v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_unordered_and_zero() {
        assert!(ModeSet::new(vec![2, 1]).is_err());
        assert!(ModeSet::new(vec![1, 1]).is_err());
        assert!(ModeSet::new(vec![0, 3]).is_err());
        assert!(ModeSet::new((1..=11).collect()).is_err());
    }

    #[test]
    fn empty_set_is_scalar() {
        let e = ModeSet::empty();
        assert_eq!(e.dim(), 1);
        assert!(e.is_subset_of(&ModeSet::new(vec![1]).unwrap()));
    }

    #[test]
    fn union_interleaves() {
        let a = ModeSet::new(vec![1, 3]).unwrap();
        let b = ModeSet::new(vec![2]).unwrap();
        let u = disjoint_union([&a, &b]).unwrap();
        assert_eq!(u.indices(), &[1, 2, 3]);
        assert_eq!(a.positions_in(&u).unwrap(), vec![0, 2]);
        assert!(disjoint_union([&a, &u]).is_err());
        assert_eq!(u.to_string(), "{1,2,3}");
    }
}
