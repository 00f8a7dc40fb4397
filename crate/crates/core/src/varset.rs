//! Bitmask-encoded subsets of the variable indices `{0, 1, ..., d}`.
//!
//! Index 0 is the response; indices `1..=d` are covariates. A set of
//! covariates therefore never has bit 0 set.

use std::fmt;

/// Subset of `{0} ∪ [d]`, bit `i` set when variable `i` is a member.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct VariableSet(u32);

/// Upper bound on the number of variables a set can address.
pub const MAX_VARIABLES: usize = 31;

impl VariableSet {
    pub const EMPTY: VariableSet = VariableSet(0);

    pub const fn from_mask(mask: u32) -> Self {
        VariableSet(mask)
    }

    pub fn singleton(index: usize) -> Self {
        debug_assert!(index < MAX_VARIABLES);
        VariableSet(1 << index)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        indices
            .into_iter()
            .fold(VariableSet::EMPTY, |acc, i| acc.with(i))
    }

    /// The covariate set `[d] = {1, ..., d}`.
    pub fn covariates(d: usize) -> Self {
        VariableSet(((1u32 << d) - 1) << 1)
    }

    /// All variables `{0, 1, ..., d}`.
    pub fn all(d: usize) -> Self {
        VariableSet((1u32 << (d + 1)) - 1)
    }

    pub const fn mask(self) -> u32 {
        self.0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn contains(self, index: usize) -> bool {
        index < MAX_VARIABLES && self.0 & (1 << index) != 0
    }

    #[must_use]
    pub fn with(self, index: usize) -> Self {
        debug_assert!(index < MAX_VARIABLES);
        VariableSet(self.0 | (1 << index))
    }

    #[must_use]
    pub fn without(self, index: usize) -> Self {
        VariableSet(self.0 & !(1 << index))
    }

    #[must_use]
    pub fn union(self, other: VariableSet) -> Self {
        VariableSet(self.0 | other.0)
    }

    pub fn is_subset_of(self, other: VariableSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// The set with the response (index 0) added.
    #[must_use]
    pub fn with_response(self) -> Self {
        self.with(0)
    }

    /// Member indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }

    pub fn to_vec(self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Position of `index` within the ascending member list.
    pub fn rank_of(self, index: usize) -> Option<usize> {
        self.contains(index)
            .then(|| (self.0 & ((1u32 << index) - 1)).count_ones() as usize)
    }

    /// Every subset of `self` (including the empty set), in ascending mask order.
    pub fn subsets(self) -> impl Iterator<Item = VariableSet> {
        let full = self.0;
        let mut next = Some(0u32);
        std::iter::from_fn(move || {
            let current = next?;
            next = if current == full {
                None
            } else {
                // Increment within the bits of `full`.
                Some((current | !full).wrapping_add(1) & full)
            };
            Some(VariableSet(current))
        })
    }
}

impl fmt::Debug for VariableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "VariableSet{self}")
    }
}

impl fmt::Display for VariableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (pos, i) in self.iter().enumerate() {
            if pos > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}
