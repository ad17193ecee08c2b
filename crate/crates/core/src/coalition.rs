use std::fmt;

/// Largest player count a [`Coalition`] bitmask can address.
pub const MAX_PLAYERS: usize = 63;

/// A subset of feature indices, stored as a bitmask.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Coalition(u64);

impl Coalition {
    pub const EMPTY: Coalition = Coalition(0);

    /// The grand coalition over `n` players.
    pub fn full(n: usize) -> Self {
        assert!(n <= MAX_PLAYERS, "coalition supports at most {MAX_PLAYERS} players");
        if n == 0 {
            Coalition(0)
        } else {
            Coalition(u64::MAX >> (64 - n))
        }
    }

    pub fn from_bits(bits: u64) -> Self {
        Coalition(bits)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        indices.into_iter().fold(Coalition::EMPTY, |c, i| c.with(i))
    }

    pub fn singleton(i: usize) -> Self {
        Coalition::EMPTY.with(i)
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, i: usize) -> bool {
        i < 64 && self.0 & (1 << i) != 0
    }

    #[must_use]
    pub fn with(self, i: usize) -> Self {
        assert!(i < MAX_PLAYERS, "player index {i} out of range");
        Coalition(self.0 | (1 << i))
    }

    #[must_use]
    pub fn without(self, i: usize) -> Self {
        if i >= 64 {
            return self;
        }
        Coalition(self.0 & !(1 << i))
    }

    /// Highest member index plus one (0 for the empty coalition).
    pub fn span(self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    /// Member indices in ascending order.
    pub fn indices(self) -> impl Iterator<Item = usize> {
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

    /// Every coalition over `n` players, in bitmask order.
    pub fn all(n: usize) -> impl Iterator<Item = Coalition> {
        assert!(n <= MAX_PLAYERS);
        (0..1u64 << n).map(Coalition)
    }
}

impl fmt::Debug for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.indices()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_and_empty() {
        assert_eq!(Coalition::full(0), Coalition::EMPTY);
        assert_eq!(Coalition::full(4).bits(), 0b1111);
        assert_eq!(Coalition::full(63).len(), 63);
        assert!(Coalition::EMPTY.is_empty());
    }

    #[test]
    fn membership() {
        let c = Coalition::from_indices([0, 2]);
        assert!(c.contains(0) && c.contains(2) && !c.contains(1));
        assert_eq!(c.indices().collect::<Vec<_>>(), vec![0, 2]);
        assert_eq!(c.without(2).with(3).indices().collect::<Vec<_>>(), vec![0, 3]);
        assert_eq!(c.span(), 3);
        assert_eq!(format!("{c:?}"), "{0, 2}");
    }

    #[test]
    fn enumerates_power_set() {
        assert_eq!(Coalition::all(4).count(), 16);
        assert_eq!(Coalition::all(0).collect::<Vec<_>>(), vec![Coalition::EMPTY]);
    }
}
