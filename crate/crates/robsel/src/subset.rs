//! Fixed-width bit-vector subsets of a ground set.
//!
//! Solvers exchange subsets only in this representation: membership tests are
//! O(1) and hashing is cheap enough to key memoization caches.

use std::cmp::Ordering;
use std::fmt;

use crate::error::{Error, Result};

/// A subset of `{0, .., width-1}` stored as a bit vector.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Subset {
    width: usize,
    blocks: Vec<u64>,
}

impl Subset {
    /// The empty subset over a ground set of `width` items.
    pub fn empty(width: usize) -> Self {
        Subset {
            width,
            blocks: vec![0; width.div_ceil(64)],
        }
    }

    /// The full ground set.
    pub fn full(width: usize) -> Self {
        let mut s = Subset::empty(width);
        for i in 0..width {
            s.insert(i);
        }
        s
    }

    /// Build from explicit item indices; rejects indices outside the ground set.
    pub fn from_indices<I: IntoIterator<Item = usize>>(width: usize, items: I) -> Result<Self> {
        let mut s = Subset::empty(width);
        for i in items {
            if i >= width {
                return Err(Error::InvalidItem { item: i, n: width });
            }
            s.insert(i);
        }
        Ok(s)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Number of selected items (popcount).
    pub fn len(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    pub fn contains(&self, item: usize) -> bool {
        debug_assert!(item < self.width);
        self.blocks[item / 64] & (1u64 << (item % 64)) != 0
    }

    pub fn insert(&mut self, item: usize) {
        assert!(item < self.width, "item {item} out of range {}", self.width);
        self.blocks[item / 64] |= 1u64 << (item % 64);
    }

    pub fn remove(&mut self, item: usize) {
        assert!(item < self.width, "item {item} out of range {}", self.width);
        self.blocks[item / 64] &= !(1u64 << (item % 64));
    }

    pub fn flip(&mut self, item: usize) {
        assert!(item < self.width, "item {item} out of range {}", self.width);
        self.blocks[item / 64] ^= 1u64 << (item % 64);
    }

    /// Copy of `self` with `item` added.
    pub fn with_inserted(&self, item: usize) -> Self {
        let mut s = self.clone();
        s.insert(item);
        s
    }

    /// Selected item indices in ascending order.
    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.iter().enumerate().flat_map(|(bi, &block)| {
            let mut bits = block;
            std::iter::from_fn(move || {
                if bits == 0 {
                    None
                } else {
                    let tz = bits.trailing_zeros() as usize;
                    bits &= bits - 1;
                    Some(bi * 64 + tz)
                }
            })
        })
    }

    pub fn is_subset_of(&self, other: &Subset) -> bool {
        self.width == other.width
            && self
                .blocks
                .iter()
                .zip(&other.blocks)
                .all(|(a, b)| a & !b == 0)
    }

    /// Order by the sorted item-index sequence (shorter prefix first), so
    /// `{v1}` < `{v1,v2}` < `{v1,v3}` < `{v2}`. Used for deterministic
    /// tie-breaking when several subsets achieve the same objective value.
    pub fn cmp_indices(&self, other: &Subset) -> Ordering {
        let mut a = self.iter_ones();
        let mut b = other.iter_ones();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (None, Some(_)) => return Ordering::Less,
                (Some(_), None) => return Ordering::Greater,
                (Some(x), Some(y)) => match x.cmp(&y) {
                    Ordering::Equal => continue,
                    ord => return ord,
                },
            }
        }
    }

    /// Raw bit blocks; used for seed derivation.
    pub(crate) fn blocks(&self) -> &[u64] {
        &self.blocks
    }
}

impl fmt::Debug for Subset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, item) in self.iter_ones().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{item}")?;
        }
        write!(f, "}}")
    }
}
