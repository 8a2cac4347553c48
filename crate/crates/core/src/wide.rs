//! Rank-oriented index with 65536-bit L1 blocks.
//!
//! Each L1 block has a 64-bit count of the ones before it and 127 cumulative
//! 16-bit counts, one per L2 block after the first. The two levels are kept
//! in separate arrays. Rank reads one L1 and at most one L2 entry; select
//! works but has to search up to 127 counts.

use std::io::{Read, Write};

use crate::bitvec::{BitVector, WORD_BITS};
use crate::block::{basic_counts, feed_block, ones_before, select_from, WORDS_PER_BASIC};
use crate::dump::{self, Header, Kind};
use crate::error::{Error, Result};
use crate::flat::search::uniform_search;
use crate::flat::{check_samples, SearchStrategy};
use crate::probe::{NoProbe, Probe};
use crate::samples::{SampleCollector, SampleConfig, Samples};
use crate::{RankSelect, SpaceUsage};

pub const L1_BITS: usize = 65536;
pub const L2_BITS: usize = 512;
/// Stored L2 counts per L1 block.
pub const L2_PER_L1: usize = 127;

const L1_BITS_LOG2: u32 = 16;
const WORDS_PER_L1: usize = L1_BITS / WORD_BITS;
const BASIC_PER_L1: usize = WORDS_PER_L1 / WORDS_PER_BASIC;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WideConfig {
    pub samples: SampleConfig,
    pub strategy: SearchStrategy,
}

impl Default for WideConfig {
    /// Rank only: no select samples.
    fn default() -> Self {
        Self {
            samples: SampleConfig::None,
            strategy: SearchStrategy::ParallelCompare,
        }
    }
}

pub struct WideIndex<'a> {
    bits: &'a BitVector,
    ones: usize,
    l1: Vec<u64>,
    l2: Vec<u16>,
    samples: Samples,
    strategy: SearchStrategy,
}

impl<'a> WideIndex<'a> {
    /// Builds a rank-only index (select still works, without samples).
    pub fn new(bits: &'a BitVector) -> Self {
        Self::with_config(bits, WideConfig::default())
    }

    pub fn with_config(bits: &'a BitVector, cfg: WideConfig) -> Self {
        let words = bits.words();
        let num_l1 = bits.len().div_ceil(L1_BITS);
        let mut l1 = Vec::with_capacity(num_l1);
        let mut l2 = Vec::with_capacity(num_l1 * L2_PER_L1);
        let mut samples = SampleCollector::new(cfg.samples, bits.len());
        let basic = basic_counts(words);

        let mut total = 0usize;
        for b in 0..num_l1 {
            l1.push(total as u64);
            let first = b * WORDS_PER_L1;
            let basic = &basic[b * BASIC_PER_L1..((b + 1) * BASIC_PER_L1).min(basic.len())];
            let mut in_block = 0u32;
            for k in 0..L2_PER_L1 {
                in_block += basic.get(k).copied().unwrap_or(0) as u32;
                l2.push(in_block as u16);
            }
            in_block += basic.get(L2_PER_L1).copied().unwrap_or(0) as u32;
            if samples.is_active() {
                feed_block(&mut samples, words, first, basic);
            }
            total += in_block as usize;
        }

        Self {
            bits,
            ones: total,
            l1,
            l2,
            samples: samples.finish(),
            strategy: cfg.strategy,
        }
    }

    pub fn bit_vector(&self) -> &'a BitVector {
        self.bits
    }

    pub fn l1_entries(&self) -> &[u64] {
        &self.l1
    }

    /// The 127 cumulative counts of L1 block `b`; entry `k - 1` holds the
    /// ones before L2 block `k`.
    pub fn l2_entries(&self, b: usize) -> &[u16] {
        &self.l2[b * L2_PER_L1..(b + 1) * L2_PER_L1]
    }

    pub fn samples(&self, bit: bool) -> Option<&[u64]> {
        self.samples.for_bit(bit)
    }

    pub fn strategy(&self) -> SearchStrategy {
        self.strategy
    }

    pub fn set_strategy(&mut self, strategy: SearchStrategy) {
        self.strategy = strategy;
    }

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
        let b = i >> L1_BITS_LOG2;
        probe.l1();
        let mut rank = self.l1[b] as usize;
        let k = (i % L1_BITS) / L2_BITS;
        if k > 0 {
            probe.l2();
            rank += self.l2[b * L2_PER_L1 + k - 1] as usize;
        }
        rank + ones_before(self.bits.words(), i / L2_BITS * WORDS_PER_BASIC, i, probe)
    }

    #[inline]
    pub fn select_with(&self, bit: bool, j: usize, strategy: SearchStrategy) -> usize {
        self.select_probed(bit, j, strategy, &mut NoProbe)
    }

    #[inline]
    pub fn select_probed<P: Probe>(&self, bit: bool, j: usize, strategy: SearchStrategy, probe: &mut P) -> usize {
        debug_assert!(j >= 1 && j <= self.count(bit), "select rank {j} does not exist");
        let l1_count = |b: usize, probe: &mut P| {
            probe.l1();
            let ones = self.l1[b] as usize;
            if bit {
                ones
            } else {
                (b << L1_BITS_LOG2) - ones
            }
        };
        let mut b = self.samples.start_hint(bit, j).map_or(0, |pos| pos >> L1_BITS_LOG2);
        while b + 1 < self.l1.len() && l1_count(b + 1, probe) < j {
            b += 1;
        }
        let mut r = j - l1_count(b, probe);

        let counts: &[u16; L2_PER_L1] = self.l2[b * L2_PER_L1..(b + 1) * L2_PER_L1].try_into().unwrap();
        probe.l2();
        let k = search_block(counts, bit, r, strategy);
        if k > 0 {
            r -= target_count(counts, bit, k);
        }
        select_from(self.bits.words(), b * WORDS_PER_L1 + k * WORDS_PER_BASIC, bit, r, probe)
    }

    /// Writes the index (not the bit vector) in the binary dump format.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let header = Header {
            kind: Kind::Wide,
            flags: dump::sample_flags(&self.samples),
            len: self.bits.len() as u64,
            ones: self.ones as u64,
            param: 0,
        };
        header.write(&mut out)?;
        dump::write_array(&mut out, &self.l1, u64::to_le_bytes)?;
        dump::write_array(&mut out, &self.l2, u16::to_le_bytes)?;
        dump::write_samples(&mut out, &self.samples)
    }

    pub fn read_from<R: Read>(mut input: R, bits: &'a BitVector) -> Result<Self> {
        let header = Header::read(&mut input, Kind::Wide)?;
        if header.len != bits.len() as u64 {
            return Err(Error::Format(format!(
                "index was built for {} bits, bit vector has {}",
                header.len,
                bits.len()
            )));
        }
        let num_l1 = bits.len().div_ceil(L1_BITS);
        let l1 = dump::read_array(&mut input, Some(num_l1), u64::from_le_bytes)?;
        let l2 = dump::read_array(&mut input, Some(num_l1 * L2_PER_L1), u16::from_le_bytes)?;
        let samples = dump::read_samples(&mut input, header.flags)?;
        let ones = header.ones as usize;
        check_samples(&samples, ones, bits.len())?;
        Ok(Self {
            bits,
            ones,
            l1,
            l2,
            samples,
            strategy: SearchStrategy::default(),
        })
    }
}

/// Ones (or zeros) before L2 block `k >= 1`.
#[inline(always)]
fn target_count(counts: &[u16; L2_PER_L1], bit: bool, k: usize) -> usize {
    let ones = counts[k - 1] as usize;
    if bit {
        ones
    } else {
        k * L2_BITS - ones
    }
}

/// Index of the L2 block holding the `r`-th one (or zero) of an L1 block,
/// i.e. the number of stored counts below `r`.
#[inline]
pub fn search_block(counts: &[u16; L2_PER_L1], bit: bool, r: usize, strategy: SearchStrategy) -> usize {
    match strategy {
        SearchStrategy::Linear => {
            let mut k = 1;
            while k <= L2_PER_L1 && target_count(counts, bit, k) < r {
                k += 1;
            }
            k - 1
        }
        SearchStrategy::UniformBinary => uniform_search(7, |k| target_count(counts, bit, k) < r),
        SearchStrategy::ParallelCompare => parallel::count_below(counts, bit, r),
    }
}

/// [`search_block`] with the binary strategy and a caller-supplied
/// `less(count, r)` comparator.
pub fn search_block_binary_by(counts: &[u16; L2_PER_L1], r: usize, mut less: impl FnMut(u16, usize) -> bool) -> usize {
    uniform_search(7, |k| less(counts[k - 1], r))
}

/// Lane-parallel comparison of all 127 counts against `r`. The counts are
/// already 16 bits wide, so no unpacking is needed.
pub mod parallel {
    use super::{L2_BITS, L2_PER_L1};

    #[inline(always)]
    pub fn count_below(counts: &[u16; L2_PER_L1], bit: bool, r: usize) -> usize {
        #[cfg(target_arch = "x86_64")]
        {
            // SAFETY: SSE2 is part of the x86-64 baseline.
            unsafe { sse2(counts, bit, r) }
        }
        #[cfg(not(target_arch = "x86_64"))]
        {
            portable(counts, bit, r)
        }
    }

    /// Branch-free count, left to the compiler to vectorize.
    #[inline]
    pub fn portable(counts: &[u16; L2_PER_L1], bit: bool, r: usize) -> usize {
        if bit {
            counts.iter().map(|&c| ((c as usize) < r) as usize).sum()
        } else {
            counts
                .iter()
                .enumerate()
                .map(|(k, &c)| (((k + 1) * L2_BITS - c as usize) < r) as usize)
                .sum()
        }
    }

    /// # Safety
    /// The CPU must support SSE2.
    #[cfg(target_arch = "x86_64")]
    #[inline]
    #[target_feature(enable = "sse2")]
    pub unsafe fn sse2(counts: &[u16; L2_PER_L1], bit: bool, r: usize) -> usize {
        use std::arch::x86_64::*;

        // unsigned 16-bit compare via the signed one: flip the sign bits
        let flip = _mm_set1_epi16(i16::MIN);
        let threshold = _mm_xor_si128(_mm_set1_epi16((r - 1) as u16 as i16), flip);
        let step = _mm_set1_epi16((8 * L2_BITS) as i16);
        let mut full = _mm_setr_epi16(512, 1024, 1536, 2048, 2560, 3072, 3584, 4096);
        let mut at_least_r = 0u32;
        let ptr = counts.as_ptr() as *const __m128i;
        for chunk in 0..L2_PER_L1 / 8 {
            let mut lanes = _mm_loadu_si128(ptr.add(chunk));
            if !bit {
                lanes = _mm_sub_epi16(full, lanes);
                full = _mm_add_epi16(full, step);
            }
            let greater = _mm_cmpgt_epi16(_mm_xor_si128(lanes, flip), threshold);
            at_least_r += (_mm_movemask_epi8(greater) as u32).count_ones();
        }
        let mut below = L2_PER_L1 / 8 * 8 - at_least_r as usize / 2;
        let tail = L2_PER_L1 / 8 * 8;
        for (k, &ones) in counts.iter().enumerate().skip(tail) {
            let ones = ones as usize;
            let count = if bit { ones } else { (k + 1) * L2_BITS - ones };
            below += (count < r) as usize;
        }
        below
    }
}

impl RankSelect for WideIndex<'_> {
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
        self.select_with(true, j, self.strategy)
    }

    #[inline]
    fn select0(&self, j: usize) -> usize {
        self.select_with(false, j, self.strategy)
    }

    fn space_usage(&self) -> SpaceUsage {
        SpaceUsage {
            l0_bytes: 0,
            l12_bytes: self.l1.len() * std::mem::size_of::<u64>() + self.l2.len() * std::mem::size_of::<u16>(),
            sample_bytes: self.samples.bytes(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::NaiveTables;
    use crate::probe::AccessCounter;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random(n: usize, p: f64, seed: u64) -> BitVector {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        BitVector::from_bits((0..n).map(|_| rng.gen_bool(p)))
    }

    fn random_counts(rng: &mut ChaCha8Rng) -> [u16; L2_PER_L1] {
        let mut acc = 0u16;
        std::array::from_fn(|_| {
            acc += match rng.gen_range(0..4) {
                0 => 0,
                1 => 512,
                _ => rng.gen_range(0..=512),
            };
            acc
        })
    }

    #[test]
    fn all_zeros() {
        let bv = BitVector::new(1 << 20, false);
        let idx = WideIndex::new(&bv);
        assert!(idx.l1_entries().iter().all(|&c| c == 0));
        assert!(idx.l2.iter().all(|&c| c == 0));
    }

    #[test]
    fn all_ones() {
        let bv = BitVector::new(131_072, true);
        let idx = WideIndex::new(&bv);
        assert_eq!(idx.l1_entries(), &[0, 65536]);
        for b in 0..2 {
            for (k, &c) in idx.l2_entries(b).iter().enumerate() {
                assert_eq!(c as usize, 512 * (k + 1));
            }
        }
        for i in [0, 511, 512, 65535, 65536, 65537, 131_072] {
            assert_eq!(idx.rank1(i), i);
        }
        for strategy in SearchStrategy::ALL {
            for j in [1, 65536, 65537, 131_072] {
                assert_eq!(idx.select_with(true, j, strategy), j - 1);
            }
        }
    }

    #[test]
    fn alternating_closed_forms() {
        let bv = BitVector::from_bits((0..200_000).map(|i| i % 2 == 1));
        let idx = WideIndex::with_config(
            &bv,
            WideConfig {
                samples: SampleConfig::Both,
                ..WideConfig::default()
            },
        );
        for strategy in SearchStrategy::ALL {
            for j in (1..=100_000).step_by(13) {
                assert_eq!(idx.select_with(true, j, strategy), 2 * j - 1);
                assert_eq!(idx.select_with(false, j, strategy), 2 * j - 2);
            }
        }
    }

    #[test]
    fn entries_match_range_popcounts() {
        let bv = random(200_000, 0.7, 31);
        let idx = WideIndex::new(&bv);
        for b in 0..idx.l1_entries().len() {
            let start = b * L1_BITS;
            assert_eq!(idx.l1_entries()[b] as usize, bv.count_ones_range(0, start));
            for (k, &c) in idx.l2_entries(b).iter().enumerate() {
                let end = (start + (k + 1) * L2_BITS).min(bv.len());
                assert_eq!(c as usize, bv.count_ones_range(start.min(bv.len()), end));
            }
        }
    }

    #[test]
    fn queries_match_oracle() {
        let bv = random(150_000, 0.2, 33);
        let t = NaiveTables::new(&bv);
        for samples in [SampleConfig::None, SampleConfig::Both] {
            let idx = WideIndex::with_config(
                &bv,
                WideConfig {
                    samples,
                    ..WideConfig::default()
                },
            );
            for i in 0..=bv.len() {
                assert_eq!(idx.rank1(i), t.rank1[i]);
            }
            for strategy in SearchStrategy::ALL {
                for bit in [false, true] {
                    for j in (1..=t.count(bit)).step_by(11) {
                        assert_eq!(idx.select_with(bit, j, strategy), t.select(bit, j));
                    }
                }
            }
        }
    }

    #[test]
    fn strategies_agree_on_random_counts() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for _ in 0..5_000 {
            let counts = random_counts(&mut rng);
            let r = rng.gen_range(1..=65536);
            let expected = counts.iter().filter(|&&c| (c as usize) < r).count();
            for bit in [true, false] {
                let results: Vec<_> = SearchStrategy::ALL
                    .iter()
                    .map(|&s| search_block(&counts, bit, r, s))
                    .collect();
                assert!(results.iter().all(|&x| x == results[0]), "{results:?}");
                assert_eq!(parallel::portable(&counts, bit, r), results[0]);
            }
            assert_eq!(search_block(&counts, true, r, SearchStrategy::Linear), expected);
            let mut calls = 0;
            search_block_binary_by(&counts, r, |c, r| {
                calls += 1;
                (c as usize) < r
            });
            assert_eq!(calls, 7);
        }
    }

    #[test]
    fn rank_reads_one_l2_entry() {
        let bv = random(1 << 18, 0.5, 36);
        let idx = WideIndex::new(&bv);
        for i in [0, 511, 512, 65535, 65536, 70000, 200_000] {
            let mut c = AccessCounter::default();
            idx.rank1_probed(i, &mut c);
            assert_eq!(c.l1_reads, 1);
            assert_eq!(c.l2_reads, usize::from(i % L1_BITS >= L2_BITS));
            assert!(c.word_reads <= 8);
        }
    }

    #[test]
    fn space_formula() {
        let bv = BitVector::new(L1_BITS, false);
        assert_eq!(WideIndex::new(&bv).space_usage().total_bytes(), 262);
        let bv = random(1 << 22, 0.5, 37);
        let pct = WideIndex::new(&bv).space_usage().overhead_percent(bv.len());
        assert!((pct - 3.198).abs() < 0.01, "{pct}");
    }

    #[test]
    fn dump_roundtrip() {
        let bv = random(140_000, 0.5, 38);
        let idx = WideIndex::with_config(
            &bv,
            WideConfig {
                samples: SampleConfig::Ones,
                ..WideConfig::default()
            },
        );
        let mut buf = Vec::new();
        idx.write_to(&mut buf).unwrap();
        let back = WideIndex::read_from(&buf[..], &bv).unwrap();
        assert_eq!(back.l1_entries(), idx.l1_entries());
        assert_eq!(back.l2, idx.l2);
        assert_eq!(back.samples(true), idx.samples(true));
        assert!(crate::FlatIndex::read_from(&buf[..], &bv).is_err());
    }
}
