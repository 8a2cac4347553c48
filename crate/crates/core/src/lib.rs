//! Rank and select indexes over plain bit vectors with a small, constant
//! space overhead.
//!
//! Three index layouts share one query interface, [`RankSelect`]:
//!
//! * [`PoppyIndex`]: 2048-bit L1 blocks with an interleaved 64-bit entry
//!   holding a 32-bit L1 count and three 10-bit L2 block popcounts.
//! * [`FlatIndex`]: 4096-bit L1 blocks with an interleaved 128-bit entry
//!   holding a 44-bit L1 count and seven 12-bit *cumulative* L2 counts, so a
//!   rank query reads a single L2 field and select can search the seven
//!   counts linearly, with a uniform binary search, or with a lane-parallel
//!   compare.
//! * [`WideIndex`]: 65536-bit L1 blocks with 64-bit L1 counts and a separate
//!   array of 127 cumulative 16-bit L2 counts per block.
//!
//! Ranks are exclusive: `rank1(i)` counts the ones in `[0, i)`. Select is
//! 1-based: `select1(j)` is the position of the `j`-th one. Both `select0`
//! and `select1` are answered from the same one-counters.
//!
//! ```
//! use flatrank::{BitVector, FlatIndex, RankSelect};
//!
//! let mut bv = BitVector::new(1000, false);
//! for i in (0..1000).step_by(3) {
//!     bv.set(i, true);
//! }
//! let rs = FlatIndex::new(&bv);
//! assert_eq!(rs.rank1(10), 4);
//! assert_eq!(rs.rank0(10), 6);
//! assert_eq!(rs.select1(4), 9);
//! assert_eq!(rs.select0(1), 1);
//! ```

mod bitvec;
mod block;
mod dump;
mod error;
pub mod flat;
pub mod oracle;
pub mod poppy;
pub mod probe;
mod samples;
pub mod wide;
pub mod word;

pub use bitvec::{BitVector, WORD_BITS};
pub use error::{Error, Result};
pub use flat::{FlatConfig, FlatIndex, FlatL12Entry, SearchStrategy};
pub use poppy::{PoppyIndex, PoppyL12Entry};
pub use samples::{SampleConfig, SAMPLE_RATE};
pub use wide::{WideConfig, WideIndex};

/// Heap memory held by an index, excluding the bit vector itself.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SpaceUsage {
    pub l0_bytes: usize,
    /// L1 and L2 entries, interleaved or not.
    pub l12_bytes: usize,
    pub sample_bytes: usize,
}

impl SpaceUsage {
    pub fn total_bytes(&self) -> usize {
        self.l0_bytes + self.l12_bytes + self.sample_bytes
    }

    /// Index size as a percentage of a bit vector of `n` bits.
    pub fn overhead_percent(&self, n: usize) -> f64 {
        100.0 * (self.total_bytes() * 8) as f64 / n as f64
    }
}

/// Rank and select queries over a bit vector.
///
/// `rank*` panics if `i > len()`. `select*` expects `1 <= j <= count`; a bad
/// `j` is a caller error that is only checked in debug builds. Use
/// [`try_rank`](Self::try_rank) and [`try_select`](Self::try_select) for
/// checked variants.
///
/// Other rank/select implementations can be plugged into the benchmark
/// harness by implementing this trait.
pub trait RankSelect {
    /// Length of the indexed bit vector.
    fn len(&self) -> usize;

    fn count_ones(&self) -> usize;

    /// Ones in `[0, i)`.
    fn rank1(&self, i: usize) -> usize;

    /// Position of the `j`-th one.
    fn select1(&self, j: usize) -> usize;

    /// Position of the `j`-th zero.
    fn select0(&self, j: usize) -> usize;

    fn space_usage(&self) -> SpaceUsage;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn count_zeros(&self) -> usize {
        self.len() - self.count_ones()
    }

    fn count(&self, bit: bool) -> usize {
        if bit {
            self.count_ones()
        } else {
            self.count_zeros()
        }
    }

    /// Zeros in `[0, i)`.
    fn rank0(&self, i: usize) -> usize {
        i - self.rank1(i)
    }

    fn rank(&self, bit: bool, i: usize) -> usize {
        if bit {
            self.rank1(i)
        } else {
            self.rank0(i)
        }
    }

    fn select(&self, bit: bool, j: usize) -> usize {
        if bit {
            self.select1(j)
        } else {
            self.select0(j)
        }
    }

    fn try_rank(&self, bit: bool, i: usize) -> Result<usize> {
        if i > self.len() {
            return Err(Error::OutOfRange {
                index: i,
                len: self.len(),
            });
        }
        Ok(self.rank(bit, i))
    }

    fn try_select(&self, bit: bool, j: usize) -> Result<usize> {
        let available = self.count(bit);
        if j == 0 || j > available {
            return Err(Error::RankDoesNotExist {
                bit: bit as u8,
                rank: j,
                available,
            });
        }
        Ok(self.select(bit, j))
    }
}
