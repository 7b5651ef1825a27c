//! Bitset-encoded sets of NFA states.

use std::fmt;

/// A subset of `{0, …, width-1}` stored as 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubsetState {
    words: Vec<u64>,
}

impl SubsetState {
    pub fn empty(width: usize) -> Self {
        SubsetState {
            words: vec![0; width.div_ceil(64).max(1)],
        }
    }

    pub fn singleton(width: usize, q: usize) -> Self {
        let mut s = Self::empty(width);
        s.insert(q);
        s
    }

    pub fn from_states<I: IntoIterator<Item = usize>>(width: usize, states: I) -> Self {
        let mut s = Self::empty(width);
        for q in states {
            s.insert(q);
        }
        s
    }

    /// Number of representable states (a multiple of 64).
    pub fn capacity(&self) -> usize {
        self.words.len() * 64
    }

    pub fn insert(&mut self, q: usize) {
        self.words[q / 64] |= 1 << (q % 64);
    }

    pub fn contains(&self, q: usize) -> bool {
        self.words
            .get(q / 64)
            .is_some_and(|w| w & (1 << (q % 64)) != 0)
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn union_with(&mut self, other: &SubsetState) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
    }

    pub fn union(&self, other: &SubsetState) -> SubsetState {
        let mut s = self.clone();
        s.union_with(other);
        s
    }

    pub fn intersects(&self, other: &SubsetState) -> bool {
        self.words.iter().zip(&other.words).any(|(a, b)| a & b != 0)
    }

    pub fn intersection(&self, other: &SubsetState) -> SubsetState {
        SubsetState {
            words: self.words.iter().zip(&other.words).map(|(a, b)| a & b).collect(),
        }
    }

    pub fn is_subset(&self, other: &SubsetState) -> bool {
        self.words.iter().zip(&other.words).all(|(a, b)| a & !b == 0)
    }

    /// Member states in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(i * 64 + bit)
            })
        })
    }
}

impl fmt::Debug for SubsetState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}
