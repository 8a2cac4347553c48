//! Rank and select with 4096-bit L1 blocks and one 128-bit entry per L1
//! block.
//!
//! ```text
//! bits   0..44   l1   ones before the L1 block (within its L0 block, or
//!                     from the start when there is no L0 index)
//! bits  44..128  c_1..c_7, 12 bits each: ones in the L1 block before L2
//!                block k (512-bit L2 blocks; c_0 = 0 is not stored)
//! ```
//!
//! Because the L2 counts are cumulative, rank reads exactly one of them, and
//! select can pick among three searches over the seven counts
//! ([`SearchStrategy`]). The L0 index (one `u64` per 2^44 bits) is only
//! needed for longer vectors and is optional.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use crate::bitvec::{BitVector, WORD_BITS};
use crate::block::{basic_counts, feed_block, ones_before, select_from, WORDS_PER_BASIC};
use crate::dump::{self, Header, Kind};
use crate::error::{Error, Result};
use crate::probe::{NoProbe, Probe};
use crate::samples::{SampleCollector, SampleConfig, Samples, SAMPLE_RATE};
use crate::{RankSelect, SpaceUsage};

pub mod search;

pub use search::{
    pack_12, search_l2_binary, search_l2_binary_by, search_l2_linear, search_l2_parallel, unpack_12_to_16,
};

pub const L0_BITS_LOG2: u32 = 44;
pub const L1_BITS: usize = 4096;
pub const L2_BITS: usize = 512;

const L1_BITS_LOG2: u32 = 12;
const WORDS_PER_L1: usize = L1_BITS / WORD_BITS;
const BASIC_PER_L1: usize = WORDS_PER_L1 / WORDS_PER_BASIC;
const L1_FIELD_BITS: u32 = 44;
const L1_FIELD_MASK: u64 = (1 << L1_FIELD_BITS) - 1;
const L2_FIELD_BITS: u32 = 12;

/// Interleaved L1/L2 entry of a [`FlatIndex`].
#[repr(transparent)]
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct FlatL12Entry(u128);

impl FlatL12Entry {
    /// `cumulative[k - 1]` is `c_k`.
    pub fn new(l1: u64, cumulative: [u16; 7]) -> Self {
        debug_assert!(l1 <= L1_FIELD_MASK);
        debug_assert!(cumulative.iter().all(|&c| c < 1 << L2_FIELD_BITS));
        Self(l1 as u128 | pack_12(cumulative) << L1_FIELD_BITS)
    }

    pub fn from_raw(raw: u128) -> Self {
        Self(raw)
    }

    pub fn raw(self) -> u128 {
        self.0
    }

    #[inline(always)]
    pub fn l1(self) -> u64 {
        self.0 as u64 & L1_FIELD_MASK
    }

    /// `c_k` for `k` in `0..8`; `c_0` is always zero.
    #[inline(always)]
    pub fn l2(self, k: usize) -> usize {
        debug_assert!(k < 8);
        // shifting the packed counts up by one field puts a zero in slot 0
        ((self.packed_l2() << L2_FIELD_BITS) >> (L2_FIELD_BITS as usize * k)) as usize & 0xFFF
    }

    /// The seven 12-bit counts, `c_1` in the lowest bits.
    #[inline(always)]
    pub fn packed_l2(self) -> u128 {
        self.0 >> L1_FIELD_BITS
    }

    pub fn cumulative(self) -> [u16; 7] {
        unpack_12_to_16(self.packed_l2())
    }
}

impl fmt::Debug for FlatL12Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FlatL12Entry")
            .field("l1", &self.l1())
            .field("l2", &self.cumulative())
            .finish()
    }
}

/// How select finds the L2 block within an L1 block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SearchStrategy {
    Linear,
    UniformBinary,
    #[default]
    ParallelCompare,
}

impl SearchStrategy {
    pub const ALL: [SearchStrategy; 3] = [Self::Linear, Self::UniformBinary, Self::ParallelCompare];

    pub fn name(self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::UniformBinary => "binary",
            Self::ParallelCompare => "simd",
        }
    }
}

impl fmt::Display for SearchStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SearchStrategy {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "linear" => Ok(Self::Linear),
            "binary" | "uniform-binary" => Ok(Self::UniformBinary),
            "simd" | "parallel" => Ok(Self::ParallelCompare),
            other => Err(format!(
                "unknown search strategy `{other}` (expected linear, binary or simd)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlatConfig {
    pub with_l0: bool,
    pub samples: SampleConfig,
    pub strategy: SearchStrategy,
}

impl Default for FlatConfig {
    fn default() -> Self {
        Self {
            with_l0: false,
            samples: SampleConfig::Ones,
            strategy: SearchStrategy::ParallelCompare,
        }
    }
}

pub struct FlatIndex<'a> {
    bits: &'a BitVector,
    ones: usize,
    l0_log2: u32,
    l0: Option<Vec<u64>>,
    l12: Vec<FlatL12Entry>,
    samples: Samples,
    strategy: SearchStrategy,
}

impl<'a> FlatIndex<'a> {
    /// Builds with the default configuration: no L0 index, samples for ones,
    /// parallel search.
    ///
    /// # Panics
    /// If the vector is longer than 2^44 bits; use
    /// [`with_config`](Self::with_config) with `with_l0` set instead.
    pub fn new(bits: &'a BitVector) -> Self {
        Self::with_config(bits, FlatConfig::default()).expect("bit vector too large without L0 index")
    }

    pub fn with_config(bits: &'a BitVector, cfg: FlatConfig) -> Result<Self> {
        Self::build(bits, cfg, L0_BITS_LOG2)
    }

    /// Builds with L0 blocks of `2^l0_log2` bits instead of `2^44`, so that
    /// the multi-L0 code paths can be exercised on small inputs.
    #[doc(hidden)]
    pub fn with_l0_block_log2(bits: &'a BitVector, cfg: FlatConfig, l0_log2: u32) -> Result<Self> {
        assert!(
            (L1_BITS_LOG2..=L0_BITS_LOG2).contains(&l0_log2),
            "L0 block size must be between 2^12 and 2^44 bits"
        );
        Self::build(bits, cfg, l0_log2)
    }

    fn build(bits: &'a BitVector, cfg: FlatConfig, l0_log2: u32) -> Result<Self> {
        let max = 1usize << l0_log2;
        if !cfg.with_l0 && bits.len() > max {
            return Err(Error::TooLarge { len: bits.len(), max });
        }
        let words = bits.words();
        let num_l1 = bits.len().div_ceil(L1_BITS);
        let l1_per_l0 = 1usize << (l0_log2 - L1_BITS_LOG2);
        let mut l0 = cfg.with_l0.then(|| Vec::with_capacity(bits.len().div_ceil(max).max(1)));
        let mut l12 = Vec::with_capacity(num_l1);
        let mut samples = SampleCollector::new(cfg.samples, bits.len());
        let basic = basic_counts(words);

        let mut total = 0usize;
        let mut in_l0 = 0usize;
        for b in 0..num_l1 {
            if let Some(l0) = &mut l0 {
                if b % l1_per_l0 == 0 {
                    l0.push(total as u64);
                    in_l0 = 0;
                }
            }
            let first = b * WORDS_PER_L1;
            let mut counts = [0u16; 8];
            let basic = &basic[b * BASIC_PER_L1..((b + 1) * BASIC_PER_L1).min(basic.len())];
            counts[..basic.len()].copy_from_slice(basic);
            if samples.is_active() {
                feed_block(&mut samples, words, first, basic);
            }
            let mut cumulative = [0u16; 7];
            let mut acc = 0u16;
            for k in 0..7 {
                acc += counts[k];
                cumulative[k] = acc;
            }
            l12.push(FlatL12Entry::new(in_l0 as u64, cumulative));
            let block_ones = (acc + counts[7]) as usize;
            in_l0 += block_ones;
            total += block_ones;
        }
        if let Some(l0) = &mut l0 {
            if l0.is_empty() {
                l0.push(0);
            }
        }

        Ok(Self {
            bits,
            ones: total,
            l0_log2,
            l0,
            l12,
            samples: samples.finish(),
            strategy: cfg.strategy,
        })
    }

    pub fn bit_vector(&self) -> &'a BitVector {
        self.bits
    }

    pub fn l0_entries(&self) -> Option<&[u64]> {
        self.l0.as_deref()
    }

    pub fn l12_entries(&self) -> &[FlatL12Entry] {
        &self.l12
    }

    pub fn samples(&self, bit: bool) -> Option<&[u64]> {
        self.samples.for_bit(bit)
    }

    pub fn strategy(&self) -> SearchStrategy {
        self.strategy
    }

    /// Changes the search used by [`RankSelect::select1`] and
    /// [`RankSelect::select0`].
    pub fn set_strategy(&mut self, strategy: SearchStrategy) {
        self.strategy = strategy;
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
        let mut rank = match &self.l0 {
            Some(l0) => {
                probe.l0();
                l0[i >> self.l0_log2] as usize
            }
            None => 0,
        };
        probe.l1();
        let entry = self.l12[i / L1_BITS];
        probe.l2();
        rank += entry.l1() as usize + entry.l2((i % L1_BITS) / L2_BITS);
        rank + ones_before(self.bits.words(), i / L2_BITS * WORDS_PER_BASIC, i, probe)
    }

    /// Position of the `j`-th `bit`, locating the L2 block with `strategy`.
    #[inline]
    pub fn select_with(&self, bit: bool, j: usize, strategy: SearchStrategy) -> usize {
        self.select_probed(bit, j, strategy, &mut NoProbe)
    }

    /// Select with an access probe.
    #[inline]
    pub fn select_probed<P: Probe>(&self, bit: bool, j: usize, strategy: SearchStrategy, probe: &mut P) -> usize {
        debug_assert!(j >= 1 && j <= self.count(bit), "select rank {j} does not exist");
        let l1_per_l0 = 1usize << (self.l0_log2 - L1_BITS_LOG2);
        let hint = self.samples.start_hint(bit, j);
        let mut b = hint.map_or(0, |pos| pos / L1_BITS);
        let mut r = j;
        let mut first = 0;
        let mut end = self.l12.len();

        if let Some(l0) = &self.l0 {
            let mut l0b = hint.map_or(0, |pos| pos >> self.l0_log2);
            let l0_count = |k: usize, probe: &mut P| {
                probe.l0();
                let ones = l0[k] as usize;
                if bit {
                    ones
                } else {
                    (k << self.l0_log2) - ones
                }
            };
            while l0b + 1 < l0.len() && l0_count(l0b + 1, probe) < j {
                l0b += 1;
            }
            first = l0b * l1_per_l0;
            end = end.min(first + l1_per_l0);
            b = b.max(first);
            r -= l0_count(l0b, probe);
        }

        let l1_count = |b: usize, probe: &mut P| {
            probe.l1();
            let ones = self.l12[b].l1() as usize;
            if bit {
                ones
            } else {
                (b - first) * L1_BITS - ones
            }
        };
        while b + 1 < end && l1_count(b + 1, probe) < r {
            b += 1;
        }
        r -= l1_count(b, probe);

        let entry = self.l12[b];
        let cumulative = |k: usize| {
            let ones = entry.l2(k);
            if bit {
                ones
            } else {
                k * L2_BITS - ones
            }
        };
        probe.l2();
        let k = match strategy {
            SearchStrategy::Linear => search::linear(cumulative, r),
            SearchStrategy::UniformBinary => search::binary(cumulative, r),
            SearchStrategy::ParallelCompare => search::parallel(entry, bit, r),
        };
        r -= cumulative(k);
        select_from(self.bits.words(), b * WORDS_PER_L1 + k * WORDS_PER_BASIC, bit, r, probe)
    }

    /// Writes the index (not the bit vector) in the binary dump format.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let header = Header {
            kind: Kind::Flat,
            flags: dump::sample_flags(&self.samples) | if self.l0.is_some() { dump::FLAG_L0 } else { 0 },
            len: self.bits.len() as u64,
            ones: self.ones as u64,
            param: self.l0_log2 as u64,
        };
        header.write(&mut out)?;
        if let Some(l0) = &self.l0 {
            dump::write_array(&mut out, l0, u64::to_le_bytes)?;
        }
        dump::write_array(&mut out, &self.l12, |e| e.raw().to_le_bytes())?;
        dump::write_samples(&mut out, &self.samples)
    }

    /// Reads an index written by [`write_to`](Self::write_to) for `bits`.
    pub fn read_from<R: Read>(mut input: R, bits: &'a BitVector) -> Result<Self> {
        let header = Header::read(&mut input, Kind::Flat)?;
        if header.len != bits.len() as u64 {
            return Err(Error::Format(format!(
                "index was built for {} bits, bit vector has {}",
                header.len,
                bits.len()
            )));
        }
        let l0_log2 = header.param as u32;
        if !(L1_BITS_LOG2 as u64..=L0_BITS_LOG2 as u64).contains(&header.param) {
            return Err(Error::Format(format!("invalid L0 block size 2^{}", header.param)));
        }
        let l0 = if header.flags & dump::FLAG_L0 != 0 {
            let expected = bits.len().div_ceil(1 << l0_log2).max(1);
            Some(dump::read_array(&mut input, Some(expected), u64::from_le_bytes)?)
        } else {
            None
        };
        let l12 = dump::read_array(&mut input, Some(bits.len().div_ceil(L1_BITS)), |b| {
            FlatL12Entry::from_raw(u128::from_le_bytes(b))
        })?;
        let samples = dump::read_samples(&mut input, header.flags)?;
        let ones = header.ones as usize;
        check_samples(&samples, ones, bits.len())?;
        Ok(Self {
            bits,
            ones,
            l0_log2,
            l0,
            l12,
            samples,
            strategy: SearchStrategy::default(),
        })
    }
}

pub(crate) fn check_samples(samples: &Samples, ones: usize, len: usize) -> Result<()> {
    for (bit, count) in [(true, ones), (false, len.saturating_sub(ones))] {
        if let Some(s) = samples.for_bit(bit) {
            if s.len() != count.div_ceil(SAMPLE_RATE) || s.last().is_some_and(|&p| p as usize >= len) {
                return Err(Error::Format("sample array does not match the bit vector".into()));
            }
        }
    }
    Ok(())
}

impl RankSelect for FlatIndex<'_> {
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
            l0_bytes: self.l0.as_ref().map_or(0, |l0| l0.len() * std::mem::size_of::<u64>()),
            l12_bytes: self.l12.len() * std::mem::size_of::<FlatL12Entry>(),
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

    #[test]
    fn entry_fields() {
        let e = FlatL12Entry::new((1 << 44) - 1, [1, 2, 3, 4, 5, 6, 4095]);
        assert_eq!(e.l1(), (1 << 44) - 1);
        assert_eq!(e.l2(0), 0);
        assert_eq!((1..8).map(|k| e.l2(k)).collect::<Vec<_>>(), [1, 2, 3, 4, 5, 6, 4095]);
        assert_eq!(e.cumulative(), [1, 2, 3, 4, 5, 6, 4095]);
        assert_eq!(std::mem::size_of::<FlatL12Entry>(), 16);
    }

    #[test]
    fn all_zeros() {
        let bv = BitVector::new(1 << 20, false);
        let idx = FlatIndex::new(&bv);
        assert!(idx.l12_entries().iter().all(|e| e.raw() == 0));
        assert_eq!(idx.rank1(777), 0);
        assert_eq!(idx.rank0(777), 777);
    }

    #[test]
    fn all_ones() {
        let bv = BitVector::new(8192, true);
        let idx = FlatIndex::new(&bv);
        let stairs = [512, 1024, 1536, 2048, 2560, 3072, 3584];
        assert_eq!(idx.l12_entries()[0].l1(), 0);
        assert_eq!(idx.l12_entries()[1].l1(), 4096);
        for e in idx.l12_entries() {
            assert_eq!(e.cumulative(), stairs);
        }
        for i in [0, 511, 512, 4095, 4096, 4097, 8192] {
            assert_eq!(idx.rank1(i), i);
        }
        for strategy in SearchStrategy::ALL {
            for j in [1, 4096, 4097, 8192] {
                assert_eq!(idx.select_with(true, j, strategy), j - 1);
            }
        }
        let bv = BitVector::new(8193, true);
        assert_eq!(FlatIndex::new(&bv).select1(8193), 8192);
    }

    #[test]
    fn alternating_closed_forms() {
        let bv = BitVector::from_bits((0..30_000).map(|i| i % 2 == 1));
        let cfg = FlatConfig {
            samples: SampleConfig::Both,
            ..FlatConfig::default()
        };
        let idx = FlatIndex::with_config(&bv, cfg).unwrap();
        for strategy in SearchStrategy::ALL {
            for j in 1..=15_000 {
                assert_eq!(idx.select_with(true, j, strategy), 2 * j - 1);
                assert_eq!(idx.select_with(false, j, strategy), 2 * j - 2);
            }
        }
    }

    #[test]
    fn entries_match_range_popcounts() {
        let bv = random(70_000, 0.42, 21);
        let idx = FlatIndex::new(&bv);
        let entries = idx.l12_entries();
        for (b, e) in entries.iter().enumerate() {
            let start = b * L1_BITS;
            assert_eq!(e.l1() as usize, bv.count_ones_range(0, start));
            for k in 1..8 {
                let end = (start + k * L2_BITS).min(bv.len());
                assert_eq!(e.l2(k), bv.count_ones_range(start, end));
            }
            let c = e.cumulative();
            assert!(c.windows(2).all(|w| w[0] <= w[1] && w[1] - w[0] <= 512));
            if let Some(next) = entries.get(b + 1) {
                assert_eq!(
                    (next.l1() - e.l1()) as usize,
                    bv.count_ones_range(start, start + L1_BITS)
                );
            }
        }
    }

    #[test]
    fn queries_match_oracle_with_small_l0_blocks() {
        let bv = random(50_000, 0.3, 23);
        let t = NaiveTables::new(&bv);
        for samples in [SampleConfig::None, SampleConfig::Ones, SampleConfig::Both] {
            for (with_l0, l0_log2) in [(true, 12), (true, 13), (true, 15), (false, 44), (true, 44)] {
                let cfg = FlatConfig {
                    with_l0,
                    samples,
                    strategy: SearchStrategy::Linear,
                };
                let idx = FlatIndex::with_l0_block_log2(&bv, cfg, l0_log2).unwrap();
                for i in 0..=bv.len() {
                    assert_eq!(idx.rank1(i), t.rank1[i]);
                }
                for strategy in SearchStrategy::ALL {
                    for bit in [false, true] {
                        for j in (1..=t.count(bit)).step_by(7) {
                            assert_eq!(idx.select_with(bit, j, strategy), t.select(bit, j));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn too_large_without_l0() {
        let bv = BitVector::new(10_000, true);
        let cfg = FlatConfig::default();
        assert!(matches!(
            FlatIndex::with_l0_block_log2(&bv, cfg, 13),
            Err(Error::TooLarge { len: 10_000, max: 8192 })
        ));
        let cfg = FlatConfig { with_l0: true, ..cfg };
        let idx = FlatIndex::with_l0_block_log2(&bv, cfg, 13).unwrap();
        assert_eq!(idx.l0_entries(), Some(&[0u64, 8192][..]));
    }

    #[test]
    fn rank_touches_one_entry() {
        let bv = random(1 << 16, 0.5, 2);
        let idx = FlatIndex::new(&bv);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..1000 {
            let i = rng.gen_range(0..bv.len());
            let mut c = AccessCounter::default();
            idx.rank1_probed(i, &mut c);
            assert_eq!((c.l0_reads, c.l1_reads, c.l2_reads), (0, 1, 1));
            assert!(c.word_reads <= 8);
        }
    }

    #[test]
    fn space_formula() {
        let bv = random(1 << 22, 0.5, 4);
        let cfg = FlatConfig {
            samples: SampleConfig::None,
            ..FlatConfig::default()
        };
        let idx = FlatIndex::with_config(&bv, cfg).unwrap();
        assert_eq!(idx.space_usage().total_bytes(), 16384);
        assert_eq!(idx.space_usage().overhead_percent(bv.len()), 3.125);
        let cfg = FlatConfig { with_l0: true, ..cfg };
        let idx = FlatIndex::with_config(&bv, cfg).unwrap();
        assert_eq!(idx.space_usage().l0_bytes, 8);
    }

    #[test]
    fn dump_roundtrip() {
        let bv = random(100_000, 0.5, 5);
        let cfg = FlatConfig {
            with_l0: true,
            samples: SampleConfig::Both,
            strategy: SearchStrategy::UniformBinary,
        };
        let idx = FlatIndex::with_config(&bv, cfg).unwrap();
        let mut buf = Vec::new();
        idx.write_to(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"FRIX");
        let back = FlatIndex::read_from(&buf[..], &bv).unwrap();
        assert_eq!(back.l12_entries(), idx.l12_entries());
        assert_eq!(back.l0_entries(), idx.l0_entries());
        assert_eq!(back.samples(false), idx.samples(false));
        assert_eq!(back.select1(1000), idx.select1(1000));

        let other = random(100_001, 0.5, 5);
        assert!(FlatIndex::read_from(&buf[..], &other).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(FlatIndex::read_from(&bad[..], &bv).is_err());
        assert!(FlatIndex::read_from(&buf[..buf.len() - 1], &bv).is_err());
    }
}
