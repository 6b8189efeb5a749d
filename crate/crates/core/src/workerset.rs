//! Bitset over worker indices.
//!
//! Worker `i` of a market is bit `i`. All subset quantification in the crate
//! (choice tables, checkers, enumeration) goes through this type.

use std::cmp::Ordering;
use std::fmt;

/// Largest number of workers a [`WorkerSet`] (and a materialized choice
/// table) can address.
pub const MAX_WORKERS: usize = 12;

#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct WorkerSet(u32);

impl WorkerSet {
    pub const EMPTY: WorkerSet = WorkerSet(0);

    pub const fn from_bits(bits: u32) -> Self {
        WorkerSet(bits)
    }

    pub const fn bits(self) -> u32 {
        self.0
    }

    /// The set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        debug_assert!(n <= 31);
        WorkerSet((1u32 << n) - 1)
    }

    pub fn singleton(w: usize) -> Self {
        WorkerSet(1 << w)
    }

    pub fn contains(self, w: usize) -> bool {
        w < 32 && self.0 >> w & 1 == 1
    }

    pub fn insert(&mut self, w: usize) {
        self.0 |= 1 << w;
    }

    pub fn remove(&mut self, w: usize) {
        self.0 &= !(1 << w);
    }

    pub fn with(self, w: usize) -> Self {
        WorkerSet(self.0 | 1 << w)
    }

    pub fn union(self, other: Self) -> Self {
        WorkerSet(self.0 | other.0)
    }

    pub fn intersection(self, other: Self) -> Self {
        WorkerSet(self.0 & other.0)
    }

    pub fn difference(self, other: Self) -> Self {
        WorkerSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: Self) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    /// Largest index in the set plus one, or 0 for the empty set.
    pub fn span(self) -> usize {
        32 - self.0.leading_zeros() as usize
    }

    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let w = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(w)
            }
        })
    }

    /// All subsets of `self`, in decreasing bit order, ending with the empty set.
    pub fn subsets(self) -> impl Iterator<Item = WorkerSet> {
        let full = self.0;
        let mut next = Some(full);
        std::iter::from_fn(move || {
            let cur = next?;
            next = if cur == 0 { None } else { Some((cur - 1) & full) };
            Some(WorkerSet(cur))
        })
    }

    /// Order by cardinality, then lexicographically by sorted member indices.
    pub fn canonical_cmp(self, other: Self) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| self.iter().cmp(other.iter()))
    }
}

impl FromIterator<usize> for WorkerSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut s = WorkerSet::EMPTY;
        for w in iter {
            s.insert(w);
        }
        s
    }
}

impl fmt::Debug for WorkerSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl PartialOrd for WorkerSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for WorkerSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.canonical_cmp(*other)
    }
}

/// Every subset of `{0, .., n-1}` in canonical order.
pub fn canonical_subsets(n: usize) -> Vec<WorkerSet> {
    let mut all: Vec<WorkerSet> = WorkerSet::full(n).subsets().collect();
    all.sort();
    all
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_order_for_three() {
        let order: Vec<Vec<usize>> = canonical_subsets(3).iter().map(|s| s.iter().collect()).collect();
        assert_eq!(
            order,
            vec![
                vec![],
                vec![0],
                vec![1],
                vec![2],
                vec![0, 1],
                vec![0, 2],
                vec![1, 2],
                vec![0, 1, 2]
            ]
        );
    }

    #[test]
    fn subsets_cover_powerset() {
        let s: WorkerSet = [0, 2, 3].into_iter().collect();
        let subs: Vec<_> = s.subsets().collect();
        assert_eq!(subs.len(), 8);
        assert!(subs.iter().all(|t| t.is_subset(s)));
        assert_eq!(*subs.last().unwrap(), WorkerSet::EMPTY);
    }

    #[test]
    fn set_algebra() {
        let a: WorkerSet = [0, 1].into_iter().collect();
        let b: WorkerSet = [1, 2].into_iter().collect();
        assert_eq!(a.union(b).len(), 3);
        assert_eq!(a.intersection(b), WorkerSet::singleton(1));
        assert_eq!(a.difference(b), WorkerSet::singleton(0));
        assert_eq!(b.span(), 3);
        assert_eq!(WorkerSet::EMPTY.span(), 0);
    }
}
