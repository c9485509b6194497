//! Bitset subsets of a ground set `Y` or of its sum universe `Y+Y`.

use serde::{Serialize, Serializer};
use smallvec::SmallVec;
use std::fmt;

/// Which canonical ordering an [`IndexSet`] indexes into.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Universe {
    Ground,
    Sums,
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSet {
    universe: Universe,
    len: usize,
    words: SmallVec<[u64; 4]>,
}

fn word_count(len: usize) -> usize {
    len.div_ceil(64)
}

impl IndexSet {
    pub fn empty(universe: Universe, len: usize) -> Self {
        IndexSet { universe, len, words: SmallVec::from_elem(0, word_count(len)) }
    }

    pub fn full(universe: Universe, len: usize) -> Self {
        let mut s = Self::empty(universe, len);
        for i in 0..len {
            s.insert(i);
        }
        s
    }

    pub fn from_indices(universe: Universe, len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut s = Self::empty(universe, len);
        for i in indices {
            s.insert(i);
        }
        s
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    /// Size of the underlying universe, not of the set.
    pub fn universe_len(&self) -> usize {
        self.len
    }

    pub fn same_universe(&self, other: &IndexSet) -> bool {
        self.universe == other.universe && self.len == other.len
    }

    #[inline]
    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.len, "index {i} outside universe of size {}", self.len);
        let (w, b) = (i / 64, i % 64);
        let fresh = self.words[w] & (1 << b) == 0;
        self.words[w] |= 1 << b;
        fresh
    }

    #[inline]
    pub fn remove(&mut self, i: usize) -> bool {
        if i >= self.len {
            return false;
        }
        let (w, b) = (i / 64, i % 64);
        let had = self.words[w] & (1 << b) != 0;
        self.words[w] &= !(1 << b);
        had
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.len && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    None
                } else {
                    let b = rest.trailing_zeros() as usize;
                    rest &= rest - 1;
                    Some(wi * 64 + b)
                }
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn union_with(&mut self, other: &IndexSet) {
        debug_assert!(self.same_universe(other));
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn intersect_with(&mut self, other: &IndexSet) {
        debug_assert!(self.same_universe(other));
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= b;
        }
    }

    pub fn difference_with(&mut self, other: &IndexSet) {
        debug_assert!(self.same_universe(other));
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersection(&self, other: &IndexSet) -> IndexSet {
        let mut s = self.clone();
        s.intersect_with(other);
        s
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        let mut s = self.clone();
        s.difference_with(other);
        s
    }

    pub fn complement(&self) -> IndexSet {
        let mut s = IndexSet::full(self.universe, self.len);
        s.difference_with(self);
        s
    }

    pub fn is_subset_of(&self, other: &IndexSet) -> bool {
        debug_assert!(self.same_universe(other));
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & b == 0)
    }

    pub fn intersection_count(&self, other: &IndexSet) -> usize {
        self.words.iter().zip(&other.words).map(|(a, b)| (a & b).count_ones() as usize).sum()
    }

    /// The `k` smallest indices of the set (all of it if `k >= count`).
    pub fn first(&self, k: usize) -> IndexSet {
        IndexSet::from_indices(self.universe, self.len, self.iter().take(k))
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_ops_span_words() {
        let mut a = IndexSet::from_indices(Universe::Sums, 130, [0, 63, 64, 129]);
        assert_eq!(a.count(), 4);
        assert_eq!(a.to_vec(), vec![0, 63, 64, 129]);
        let b = IndexSet::from_indices(Universe::Sums, 130, [63, 100]);
        assert_eq!(a.union(&b).count(), 5);
        assert_eq!(a.intersection(&b).to_vec(), vec![63]);
        assert_eq!(a.difference(&b).to_vec(), vec![0, 64, 129]);
        assert_eq!(a.complement().count(), 126);
        assert!(!a.complement().contains(129));
        assert!(a.first(2).is_subset_of(&a));
        assert!(a.remove(0));
        assert!(!a.contains(0));
    }
}
