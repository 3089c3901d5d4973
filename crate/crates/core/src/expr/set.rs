use std::fmt;

use fixedbitset::FixedBitSet;

/// Largest universe a set variable may be declared over.
pub const MAX_UNIVERSE: usize = 1024;

/// A finite set of element indices backed by a fixed-width bitset.
///
/// The width is the declared universe size; members are always `< universe()`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Set(FixedBitSet);

impl Set {
    pub fn empty(universe: usize) -> Self {
        Set(FixedBitSet::with_capacity(universe))
    }

    pub fn full(universe: usize) -> Self {
        let mut bits = FixedBitSet::with_capacity(universe);
        bits.insert_range(..);
        Set(bits)
    }

    /// Builds a set from members; members outside the universe are ignored.
    pub fn from_members<I: IntoIterator<Item = usize>>(universe: usize, members: I) -> Self {
        let mut set = Set::empty(universe);
        for x in members {
            if x < universe {
                set.0.insert(x);
            }
        }
        set
    }

    pub fn universe(&self) -> usize {
        self.0.len()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.contains(x)
    }

    pub fn insert(&mut self, x: usize) {
        if x >= self.0.len() {
            self.0.grow(x + 1);
        }
        self.0.insert(x);
    }

    pub fn remove(&mut self, x: usize) {
        if x < self.0.len() {
            self.0.set(x, false);
        }
    }

    pub fn len(&self) -> usize {
        self.0.count_ones(..)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_clear()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.ones()
    }

    pub fn is_subset(&self, other: &Set) -> bool {
        self.0.is_subset(&other.0)
    }

    fn widened(&self, universe: usize) -> FixedBitSet {
        let mut bits = self.0.clone();
        if bits.len() < universe {
            bits.grow(universe);
        }
        bits
    }

    pub fn union(&self, other: &Set) -> Set {
        let mut bits = self.widened(other.universe());
        bits.union_with(&other.0);
        Set(bits)
    }

    pub fn intersection(&self, other: &Set) -> Set {
        let mut bits = self.widened(other.universe());
        bits.intersect_with(&other.0);
        Set(bits)
    }

    pub fn difference(&self, other: &Set) -> Set {
        let mut bits = self.0.clone();
        bits.difference_with(&other.0);
        Set(bits)
    }

    /// Complement within this set's own universe.
    pub fn complement(&self) -> Set {
        let mut bits = self.0.clone();
        bits.toggle_range(..);
        Set(bits)
    }

    /// Re-expresses the set over a (possibly larger) universe.
    pub fn with_universe(&self, universe: usize) -> Set {
        let mut bits = FixedBitSet::with_capacity(universe);
        for x in self.0.ones().take_while(|&x| x < universe) {
            bits.insert(x);
        }
        Set(bits)
    }
}

impl fmt::Debug for Set {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_algebra() {
        let a = Set::from_members(8, [1, 2, 5]);
        let b = Set::from_members(8, [2, 3]);
        assert_eq!(a.union(&b), Set::from_members(8, [1, 2, 3, 5]));
        assert_eq!(a.intersection(&b), Set::from_members(8, [2]));
        assert_eq!(a.difference(&b), Set::from_members(8, [1, 5]));
        assert_eq!(b.complement().len(), 6);
        assert!(Set::from_members(8, [2]).is_subset(&a));
        assert!(!b.is_subset(&a));
    }

    #[test]
    fn mixed_universe_union_widens() {
        let a = Set::from_members(4, [1]);
        let b = Set::from_members(10, [9]);
        let u = a.union(&b);
        assert_eq!(u.universe(), 10);
        assert_eq!(u.iter().collect::<Vec<_>>(), vec![1, 9]);
    }
}
