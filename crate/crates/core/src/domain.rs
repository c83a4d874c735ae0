//! Mutable per-variable value sets.
//!
//! Values are addressed by their index in the variable's initial domain, so a
//! domain is a fixed-capacity bit vector over `0..initial_size`.

use std::fmt;

use crate::network::{ConstraintNetwork, NetworkError};

/// Fixed-capacity set of value indices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ValueSet {
    words: Vec<u64>,
    capacity: usize,
    len: usize,
}

impl ValueSet {
    pub fn full(capacity: usize) -> Self {
        let mut words = vec![u64::MAX; capacity.div_ceil(64)];
        if !capacity.is_multiple_of(64) {
            if let Some(last) = words.last_mut() {
                *last = (1u64 << (capacity % 64)) - 1;
            }
        }
        ValueSet {
            words,
            capacity,
            len: capacity,
        }
    }

    pub fn empty(capacity: usize) -> Self {
        ValueSet {
            words: vec![0; capacity.div_ceil(64)],
            capacity,
            len: 0,
        }
    }

    #[inline]
    pub(crate) fn words(&self) -> &[u64] {
        &self.words
    }

    #[inline]
    pub fn capacity(&self) -> usize {
        self.capacity
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn contains(&self, value: usize) -> bool {
        value < self.capacity && self.words[value >> 6] & (1 << (value & 63)) != 0
    }

    /// Inserts `value`; returns whether it was absent.
    pub fn insert(&mut self, value: usize) -> bool {
        assert!(value < self.capacity, "value index out of range");
        let word = &mut self.words[value >> 6];
        let bit = 1 << (value & 63);
        if *word & bit == 0 {
            *word |= bit;
            self.len += 1;
            true
        } else {
            false
        }
    }

    /// Removes `value`; returns whether it was present.
    #[inline]
    pub fn remove(&mut self, value: usize) -> bool {
        if value >= self.capacity {
            return false;
        }
        let word = &mut self.words[value >> 6];
        let bit = 1 << (value & 63);
        if *word & bit != 0 {
            *word &= !bit;
            self.len -= 1;
            true
        } else {
            false
        }
    }

    pub fn clear(&mut self) {
        self.words.iter_mut().for_each(|w| *w = 0);
        self.len = 0;
    }

    /// Smallest member `>= from`.
    #[inline]
    pub fn next_from(&self, from: usize) -> Option<usize> {
        if from >= self.capacity {
            return None;
        }
        let mut w = from >> 6;
        let mut bits = self.words[w] & (u64::MAX << (from & 63));
        loop {
            if bits != 0 {
                return Some((w << 6) + bits.trailing_zeros() as usize);
            }
            w += 1;
            if w == self.words.len() {
                return None;
            }
            bits = self.words[w];
        }
    }

    #[inline]
    pub fn first(&self) -> Option<usize> {
        self.next_from(0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        let mut next = self.next_from(0);
        std::iter::from_fn(move || {
            let current = next?;
            next = self.next_from(current + 1);
            Some(current)
        })
    }

    pub fn is_subset(&self, other: &ValueSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter().chain(std::iter::repeat(&0)))
            .all(|(a, b)| a & !b == 0)
    }
}

impl fmt::Debug for ValueSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// The current sub-domain of every variable.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct DomainState {
    sets: Vec<ValueSet>,
    empty_count: usize,
}

impl DomainState {
    /// Full initial domains of `net`.
    pub fn full(net: &ConstraintNetwork) -> Self {
        Self::from_sets(
            (0..net.var_count())
                .map(|i| ValueSet::full(net.domain_size(i)))
                .collect(),
        )
    }

    pub fn from_sets(sets: Vec<ValueSet>) -> Self {
        let empty_count = sets.iter().filter(|s| s.is_empty()).count();
        DomainState { sets, empty_count }
    }

    #[inline]
    pub fn var_count(&self) -> usize {
        self.sets.len()
    }

    #[inline]
    pub fn domain(&self, var: usize) -> &ValueSet {
        &self.sets[var]
    }

    pub fn domains(&self) -> &[ValueSet] {
        &self.sets
    }

    #[inline]
    pub fn contains(&self, var: usize, value: usize) -> bool {
        self.sets[var].contains(value)
    }

    /// True iff some domain is empty.
    #[inline]
    pub fn is_wiped_out(&self) -> bool {
        self.empty_count > 0
    }

    /// Removes `(var, value)`; returns whether it was present.
    #[inline]
    pub fn remove(&mut self, var: usize, value: usize) -> bool {
        let set = &mut self.sets[var];
        if set.remove(value) {
            if set.is_empty() {
                self.empty_count += 1;
            }
            true
        } else {
            false
        }
    }

    /// Empties every domain, returning the removed values in ascending
    /// `(var, value)` order.
    pub fn clear_all(&mut self) -> Vec<(usize, usize)> {
        let mut removed = Vec::new();
        for (var, set) in self.sets.iter_mut().enumerate() {
            removed.extend(set.iter().map(|v| (var, v)));
            set.clear();
        }
        self.empty_count = self.sets.len();
        removed
    }

    /// Keeps only `value` in the domain of `var`.
    pub(crate) fn assign(&mut self, var: usize, value: usize) {
        let capacity = self.sets[var].capacity();
        let was_empty = self.sets[var].is_empty();
        let mut single = ValueSet::empty(capacity);
        single.insert(value);
        self.sets[var] = single;
        if was_empty {
            self.empty_count -= 1;
        }
    }

    pub fn total_values(&self) -> usize {
        self.sets.iter().map(ValueSet::len).sum()
    }

    /// Component-wise inclusion.
    pub fn is_subset(&self, other: &DomainState) -> bool {
        self.sets.len() == other.sets.len()
            && self
                .sets
                .iter()
                .zip(&other.sets)
                .all(|(a, b)| a.is_subset(b))
    }

    /// Values present in `self` but not in `other`, ascending.
    pub fn difference(&self, other: &DomainState) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (var, set) in self.sets.iter().enumerate() {
            out.extend(set.iter().filter(|&v| !other.contains(var, v)).map(|v| (var, v)));
        }
        out
    }
}

impl fmt::Debug for DomainState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.sets.iter()).finish()
    }
}

/// A fresh copy of `state` with `D_var = {value}`; `state` is untouched.
pub fn restrict_to_singleton(
    net: &ConstraintNetwork,
    state: &DomainState,
    var: usize,
    value: usize,
) -> Result<DomainState, NetworkError> {
    if var >= net.var_count() {
        return Err(NetworkError::VariableOutOfRange(var));
    }
    if !state.contains(var, value) {
        return Err(NetworkError::ValueNotInDomain { var, value });
    }
    let mut restricted = state.clone();
    restricted.assign(var, value);
    Ok(restricted)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_set_scans() {
        let mut s = ValueSet::full(130);
        assert_eq!(s.len(), 130);
        for v in 0..128 {
            s.remove(v);
        }
        assert_eq!(s.next_from(0), Some(128));
        assert_eq!(s.next_from(129), Some(129));
        assert_eq!(s.next_from(130), None);
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![128, 129]);
        assert!(!s.remove(5));
        assert!(s.insert(5));
        assert_eq!(s.first(), Some(5));
    }

    #[test]
    fn wipeout_tracks_empty_sets() {
        let mut st = DomainState::from_sets(vec![ValueSet::full(1), ValueSet::full(2)]);
        assert!(!st.is_wiped_out());
        st.remove(0, 0);
        assert!(st.is_wiped_out());
        st.assign(0, 0);
        assert!(!st.is_wiped_out());
        let removed = st.clear_all();
        assert_eq!(removed, vec![(0, 0), (1, 0), (1, 1)]);
        assert!(st.is_wiped_out());
    }
}
