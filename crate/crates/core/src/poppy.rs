//! Rank and select with 2048-bit L1 blocks and an interleaved 64-bit entry
//! per L1 block.
//!
//! ```text
//! L0:  u64 per 2^32 bits  ones before the L0 block
//! L12: u32 l1             ones before the L1 block, within its L0 block
//!      u32 l2             popcounts of L2 blocks 0, 1, 2 (10 bits each)
//! ```
//!
//! The popcount of the fourth L2 block is implied by the next entry. The L2
//! counts are per block, so queries add them up while scanning.

use crate::bitvec::{BitVector, WORD_BITS};
use crate::block::{basic_counts, feed_block, ones_before, select_from, WORDS_PER_BASIC};
use crate::probe::{NoProbe, Probe};
use crate::samples::{SampleCollector, SampleConfig, Samples};
use crate::{RankSelect, SpaceUsage};

pub const L0_BITS_LOG2: u32 = 32;
pub const L1_BITS: usize = 2048;
pub const L2_BITS: usize = 512;

const L1_BITS_LOG2: u32 = 11;
const WORDS_PER_L1: usize = L1_BITS / WORD_BITS;
const BASIC_PER_L1: usize = WORDS_PER_L1 / WORDS_PER_BASIC;
const L2_FIELD_BITS: u32 = 10;
const L2_FIELD_MASK: u32 = (1 << L2_FIELD_BITS) - 1;

/// One interleaved L1/L2 entry. `l1` is the first field so it is read with
/// a plain 32-bit load.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct PoppyL12Entry {
    l1: u32,
    l2: u32,
}

impl PoppyL12Entry {
    pub fn new(l1: u32, counts: [u32; 3]) -> Self {
        debug_assert!(counts.iter().all(|&c| c <= L2_BITS as u32));
        let l2 = counts[0] | counts[1] << L2_FIELD_BITS | counts[2] << (2 * L2_FIELD_BITS);
        Self { l1, l2 }
    }

    /// Ones before this L1 block within its L0 block.
    #[inline(always)]
    pub fn l1(self) -> u32 {
        self.l1
    }

    /// Popcount of L2 block `k` (`k < 3`).
    #[inline(always)]
    pub fn l2(self, k: usize) -> u32 {
        (self.l2 >> (L2_FIELD_BITS as usize * k)) & L2_FIELD_MASK
    }

    pub fn l2_counts(self) -> [u32; 3] {
        [self.l2(0), self.l2(1), self.l2(2)]
    }
}

pub struct PoppyIndex<'a> {
    bits: &'a BitVector,
    ones: usize,
    l0_log2: u32,
    l0: Vec<u64>,
    l12: Vec<PoppyL12Entry>,
    samples: Samples,
}

impl<'a> PoppyIndex<'a> {
    /// Builds the index with select samples for ones.
    pub fn new(bits: &'a BitVector) -> Self {
        Self::with_samples(bits, SampleConfig::Ones)
    }

    pub fn with_samples(bits: &'a BitVector, samples: SampleConfig) -> Self {
        Self::build(bits, samples, L0_BITS_LOG2)
    }

    /// Builds with L0 blocks of `2^l0_log2` bits instead of `2^32`, so that
    /// the multi-L0 code paths can be exercised on small inputs.
    #[doc(hidden)]
    pub fn with_l0_block_log2(bits: &'a BitVector, samples: SampleConfig, l0_log2: u32) -> Self {
        assert!(
            (L1_BITS_LOG2..=L0_BITS_LOG2).contains(&l0_log2),
            "L0 block size must be between 2^11 and 2^32 bits"
        );
        Self::build(bits, samples, l0_log2)
    }

    fn build(bits: &'a BitVector, sample_cfg: SampleConfig, l0_log2: u32) -> Self {
        let words = bits.words();
        let num_l1 = bits.len().div_ceil(L1_BITS);
        let l1_per_l0 = 1usize << (l0_log2 - L1_BITS_LOG2);
        let mut l0 = Vec::with_capacity(bits.len().div_ceil(1 << l0_log2).max(1));
        let mut l12 = Vec::with_capacity(num_l1);
        let mut samples = SampleCollector::new(sample_cfg, bits.len());
        let basic = basic_counts(words);

        let mut total = 0usize;
        let mut in_l0 = 0usize;
        for b in 0..num_l1 {
            if b % l1_per_l0 == 0 {
                l0.push(total as u64);
                in_l0 = 0;
            }
            let first = b * WORDS_PER_L1;
            let mut counts = [0u32; 4];
            let basic = &basic[b * BASIC_PER_L1..((b + 1) * BASIC_PER_L1).min(basic.len())];
            for (c, &n) in counts.iter_mut().zip(basic) {
                *c = n as u32;
            }
            if samples.is_active() {
                feed_block(&mut samples, words, first, basic);
            }
            l12.push(PoppyL12Entry::new(in_l0 as u32, [counts[0], counts[1], counts[2]]));
            let block_ones = counts.iter().sum::<u32>() as usize;
            in_l0 += block_ones;
            total += block_ones;
        }
        if l0.is_empty() {
            l0.push(0);
        }

        Self {
            bits,
            ones: total,
            l0_log2,
            l0,
            l12,
            samples: samples.finish(),
        }
    }

    pub fn bit_vector(&self) -> &'a BitVector {
        self.bits
    }

    pub fn l0_entries(&self) -> &[u64] {
        &self.l0
    }

    pub fn l12_entries(&self) -> &[PoppyL12Entry] {
        &self.l12
    }

    pub fn samples(&self, bit: bool) -> Option<&[u64]> {
        self.samples.for_bit(bit)
    }

    /// Rank with an access probe.
    #[inline]
    pub fn rank1_probed<P: Probe>(&self, i: usize, probe: &mut P) -> usize {
        assert!(
            i <= self.bits.len(),
            "rank position {i} out of range (len {})",
            self.bits.len()
        );
        if i == self.bits.len() {
            return self.ones;
        }
        probe.l0();
        let mut rank = self.l0[i >> self.l0_log2] as usize;
        probe.l1();
        let entry = self.l12[i / L1_BITS];
        rank += entry.l1() as usize;
        for k in 0..(i % L1_BITS) / L2_BITS {
            probe.l2();
            rank += entry.l2(k) as usize;
        }
        rank + ones_before(self.bits.words(), i / L2_BITS * WORDS_PER_BASIC, i, probe)
    }

    /// Select with an access probe.
    #[inline]
    pub fn select_probed<P: Probe>(&self, bit: bool, j: usize, probe: &mut P) -> usize {
        debug_assert!(j >= 1 && j <= self.count(bit), "select rank {j} does not exist");
        let l1_per_l0 = 1usize << (self.l0_log2 - L1_BITS_LOG2);
        let (mut l0b, mut b) = match self.samples.start_hint(bit, j) {
            Some(pos) => (pos >> self.l0_log2, pos / L1_BITS),
            None => (0, 0),
        };

        while l0b + 1 < self.l0.len() && self.l0_count(bit, l0b + 1, probe) < j {
            l0b += 1;
        }
        let first = l0b * l1_per_l0;
        b = b.max(first);
        let mut r = j - self.l0_count(bit, l0b, probe);

        let end = self.l12.len().min(first + l1_per_l0);
        while b + 1 < end && self.l1_count(bit, b + 1, first, probe) < r {
            b += 1;
        }
        r -= self.l1_count(bit, b, first, probe);

        let entry = self.l12[b];
        let mut k = 0;
        while k < 3 {
            probe.l2();
            let ones = entry.l2(k) as usize;
            let count = if bit { ones } else { L2_BITS - ones };
            if r <= count {
                break;
            }
            r -= count;
            k += 1;
        }
        select_from(self.bits.words(), b * WORDS_PER_L1 + k * WORDS_PER_BASIC, bit, r, probe)
    }

    #[inline(always)]
    fn l0_count<P: Probe>(&self, bit: bool, k: usize, probe: &mut P) -> usize {
        probe.l0();
        let ones = self.l0[k] as usize;
        if bit {
            ones
        } else {
            (k << self.l0_log2) - ones
        }
    }

    #[inline(always)]
    fn l1_count<P: Probe>(&self, bit: bool, b: usize, first: usize, probe: &mut P) -> usize {
        probe.l1();
        let ones = self.l12[b].l1() as usize;
        if bit {
            ones
        } else {
            (b - first) * L1_BITS - ones
        }
    }
}

impl RankSelect for PoppyIndex<'_> {
    fn len(&self) -> usize {
        self.bits.len()
    }

    fn count_ones(&self) -> usize {
        self.ones
    }

    #[inline]
    fn rank1(&self, i: usize) -> usize {
        self.rank1_probed(i, &mut NoProbe)
    }

    #[inline]
    fn select1(&self, j: usize) -> usize {
        self.select_probed(true, j, &mut NoProbe)
    }

    #[inline]
    fn select0(&self, j: usize) -> usize {
        self.select_probed(false, j, &mut NoProbe)
    }

    fn space_usage(&self) -> SpaceUsage {
        SpaceUsage {
            l0_bytes: self.l0.len() * std::mem::size_of::<u64>(),
            l12_bytes: self.l12.len() * std::mem::size_of::<PoppyL12Entry>(),
            sample_bytes: self.samples.bytes(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::NaiveTables;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, p: f64, seed: u64) -> BitVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        BitVector::from_bits((0..n).map(|_| rng.gen_bool(p)))
    }

    #[test]
    fn entry_layout() {
        assert_eq!(std::mem::size_of::<PoppyL12Entry>(), 8);
        assert_eq!(std::mem::offset_of!(PoppyL12Entry, l1), 0);
        let e = PoppyL12Entry::new(7, [512, 0, 301]);
        assert_eq!(e.l1(), 7);
        assert_eq!(e.l2_counts(), [512, 0, 301]);
    }

    #[test]
    fn all_zeros() {
        let bv = BitVector::new(1 << 20, false);
        let idx = PoppyIndex::new(&bv);
        assert!(idx.l12_entries().iter().all(|e| e.l1() == 0 && e.l2_counts() == [0; 3]));
        assert_eq!(idx.samples(true), Some(&[][..]));
        assert_eq!(idx.rank0(12345), 12345);
        assert_eq!(idx.rank1(1 << 20), 0);
    }

    #[test]
    fn all_ones() {
        let bv = BitVector::new(8192, true);
        let idx = PoppyIndex::new(&bv);
        for (k, e) in idx.l12_entries().iter().enumerate() {
            assert_eq!(e.l1() as usize, 2048 * k);
            assert_eq!(e.l2_counts(), [512; 3]);
        }
        for i in [0, 511, 512, 2047, 2048, 4096, 8192] {
            assert_eq!(idx.rank1(i), i);
        }
        for j in [1, 512, 2048, 8192] {
            assert_eq!(idx.select1(j), j - 1);
        }
        let bv = BitVector::new(8193, true);
        assert_eq!(PoppyIndex::new(&bv).select1(8193), 8192);
    }

    #[test]
    fn alternating_closed_forms() {
        let bv = BitVector::from_bits((0..20_000).map(|i| i % 2 == 1));
        let idx = PoppyIndex::with_samples(&bv, SampleConfig::Both);
        for j in 1..=10_000 {
            assert_eq!(idx.select1(j), 2 * j - 1);
            assert_eq!(idx.select0(j), 2 * j - 2);
        }
    }

    #[test]
    fn entries_match_block_popcounts() {
        let bv = random(50_000, 0.37, 5);
        let idx = PoppyIndex::new(&bv);
        let entries = idx.l12_entries();
        for (b, e) in entries.iter().enumerate() {
            let start = b * L1_BITS;
            assert_eq!(e.l1() as usize, bv.count_ones_range(0, start));
            for k in 0..3 {
                let s = (start + k * L2_BITS).min(bv.len());
                let t = (start + (k + 1) * L2_BITS).min(bv.len());
                assert_eq!(e.l2(k) as usize, bv.count_ones_range(s, t));
            }
            if let Some(next) = entries.get(b + 1) {
                let fourth = bv.count_ones_range(start + 3 * L2_BITS, start + L1_BITS);
                let sum: u32 = e.l2_counts().iter().sum();
                assert_eq!(next.l1(), e.l1() + sum + fourth as u32);
            }
        }
    }

    #[test]
    fn queries_match_oracle_with_small_l0_blocks() {
        let bv = random(40_000, 0.6, 9);
        let t = NaiveTables::new(&bv);
        for cfg in [SampleConfig::None, SampleConfig::Both] {
            for l0_log2 in [11, 12, 13, 32] {
                let idx = PoppyIndex::with_l0_block_log2(&bv, cfg, l0_log2);
                assert_eq!(idx.l0_entries()[0], 0);
                for i in 0..=bv.len() {
                    assert_eq!(idx.rank1(i), t.rank1[i]);
                }
                for bit in [false, true] {
                    for j in 1..=t.count(bit) {
                        assert_eq!(idx.select(bit, j), t.select(bit, j), "bit {bit} j {j} l0 {l0_log2}");
                    }
                }
            }
        }
    }

    #[test]
    fn space_formula() {
        let bv = random(1 << 22, 0.5, 3);
        let idx = PoppyIndex::with_samples(&bv, SampleConfig::None);
        let space = idx.space_usage();
        assert_eq!(space.l12_bytes, 2048 * 8);
        assert_eq!(space.l0_bytes, 8);
        let with = PoppyIndex::new(&bv);
        let samples = bv.count_ones().div_ceil(8192);
        assert_eq!(with.space_usage().total_bytes() * 8, 64 + 64 * 2048 + 64 * samples);
    }

    #[test]
    fn rank_reads_at_most_three_l2_fields() {
        let bv = random(10_000, 0.5, 1);
        let idx = PoppyIndex::new(&bv);
        for i in [0, 600, 1100, 1600, 2047] {
            let mut c = crate::probe::AccessCounter::default();
            idx.rank1_probed(i, &mut c);
            assert_eq!(c.l2_reads, i / 512);
            assert!(c.word_reads <= 8);
        }
    }
}
