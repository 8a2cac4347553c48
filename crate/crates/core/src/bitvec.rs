use std::fmt;
use std::io::{Read, Write};

use crate::error::{Error, Result};

/// Number of bits in a storage word.
pub const WORD_BITS: usize = 64;

/// A fixed-length sequence of bits packed into 64-bit words.
///
/// Bit `i` lives at bit `i % 64` of word `i / 64` (least significant bit
/// first). Bits of the last word beyond [`len`](Self::len) are always zero,
/// which lets indexes treat the vector as zero-padded up to any block
/// boundary.
///
/// Indexes borrow the vector, so it cannot be modified while an index over it
/// is alive.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
}

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

/// Mask selecting the low `bits` bits of a word (`bits` < 64).
#[inline]
pub(crate) fn low_mask(bits: usize) -> u64 {
    debug_assert!(bits < WORD_BITS);
    (1u64 << bits) - 1
}

impl BitVector {
    /// Creates a vector of `len` bits, all equal to `fill`.
    pub fn new(len: usize, fill: bool) -> Self {
        let pattern = if fill { u64::MAX } else { 0 };
        let mut bv = Self {
            len,
            words: vec![pattern; words_for(len)],
        };
        bv.clear_padding();
        bv
    }

    /// Builds a vector from raw words. Fails if the word count does not match
    /// `len` or if any padding bit is set.
    pub fn from_words(len: usize, words: Vec<u64>) -> Result<Self> {
        if words.len() != words_for(len) {
            return Err(Error::Format(format!(
                "{} words cannot hold exactly {len} bits",
                words.len()
            )));
        }
        let bv = Self { len, words };
        if bv.padding_bits() != 0 {
            return Err(Error::Format("padding bits past the end are set".into()));
        }
        Ok(bv)
    }

    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0;
        for bit in bits {
            if len % WORD_BITS == 0 {
                words.push(0);
            }
            if bit {
                *words.last_mut().unwrap() |= 1 << (len % WORD_BITS);
            }
            len += 1;
        }
        Self { len, words }
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
    pub fn num_words(&self) -> usize {
        self.words.len()
    }

    #[inline]
    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Returns the raw word `w`. The last word carries zero padding.
    #[inline]
    pub fn word(&self, w: usize) -> u64 {
        self.words[w]
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len, "bit {i} out of range (len {})", self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit {i} out of range (len {})", self.len);
        let word = &mut self.words[i / WORD_BITS];
        let mask = 1u64 << (i % WORD_BITS);
        if bit {
            *word |= mask;
        } else {
            *word &= !mask;
        }
    }

    /// Total number of set bits.
    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.count_ones()
    }

    /// Number of set bits in `[start, end)`.
    pub fn count_ones_range(&self, start: usize, end: usize) -> usize {
        assert!(
            start <= end && end <= self.len,
            "invalid range {start}..{end} for length {}",
            self.len
        );
        if start == end {
            return 0;
        }
        let first = start / WORD_BITS;
        let last = (end - 1) / WORD_BITS;
        let head = u64::MAX << (start % WORD_BITS);
        let tail = match end % WORD_BITS {
            0 => u64::MAX,
            r => low_mask(r),
        };
        if first == last {
            return (self.words[first] & head & tail).count_ones() as usize;
        }
        let mut ones = (self.words[first] & head).count_ones() as usize;
        ones += self.words[first + 1..last]
            .iter()
            .map(|w| w.count_ones() as usize)
            .sum::<usize>();
        ones + (self.words[last] & tail).count_ones() as usize
    }

    /// Iterates over all bits in order.
    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Writes the vector as an 8-byte little-endian bit length followed by
    /// every word in little-endian order.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        out.write_all(&(self.len as u64).to_le_bytes())?;
        for w in &self.words {
            out.write_all(&w.to_le_bytes())?;
        }
        Ok(())
    }

    /// Reads a vector written by [`write_to`](Self::write_to).
    pub fn read_from<R: Read>(mut input: R) -> Result<Self> {
        let mut buf = [0u8; 8];
        input.read_exact(&mut buf)?;
        let len = u64::from_le_bytes(buf);
        let len =
            usize::try_from(len).map_err(|_| Error::Format(format!("length {len} does not fit this platform")))?;
        let mut words = Vec::with_capacity(words_for(len));
        for _ in 0..words_for(len) {
            input.read_exact(&mut buf)?;
            words.push(u64::from_le_bytes(buf));
        }
        Self::from_words(len, words)
    }

    fn padding_bits(&self) -> u64 {
        match (self.len % WORD_BITS, self.words.last()) {
            (0, _) | (_, None) => 0,
            (r, Some(&last)) => last & !low_mask(r),
        }
    }

    fn clear_padding(&mut self) {
        let r = self.len % WORD_BITS;
        if r != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= low_mask(r);
            }
        }
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BitVector")
            .field("len", &self.len)
            .field("ones", &self.count_ones())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn empty_vector_has_no_words() {
        let bv = BitVector::new(0, false);
        assert!(bv.words().is_empty());
        assert_eq!(BitVector::new(0, true).num_words(), 0);
    }

    #[test]
    fn fill_with_ones_keeps_padding_zero() {
        let bv = BitVector::new(65, true);
        assert_eq!(bv.word(0), u64::MAX);
        assert_eq!(bv.word(1), 1);
        assert_eq!(BitVector::new(64, true).word(0), 0xFFFF_FFFF_FFFF_FFFF);
    }

    #[test]
    fn every_second_bit() {
        let mut bv = BitVector::new(1000, false);
        for i in (0..1000).step_by(2) {
            bv.set(i, true);
        }
        assert_eq!(bv.count_ones(), 500);
    }

    #[test]
    fn get_on_constant_vectors() {
        assert!(BitVector::new(8, true).get(3));
        assert!(!BitVector::new(8, false).get(3));
    }

    #[test]
    fn set_get_roundtrip_and_involution() {
        let mut bv = BitVector::new(257, false);
        for i in 0..257 {
            let before = bv.word(i / 64);
            bv.set(i, true);
            assert!(bv.get(i));
            bv.set(i, false);
            assert!(!bv.get(i));
            assert_eq!(bv.word(i / 64), before);
        }
        for i in 0..257 {
            bv.set(i, true);
        }
        assert_eq!(bv.count_ones(), 257);
        assert_eq!(bv.word(4), 1);
    }

    #[test]
    fn random_edits_match_shadow() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 3000;
        let mut shadow = vec![false; n];
        let mut bv = BitVector::new(n, false);
        for _ in 0..20_000 {
            let i = rng.gen_range(0..n);
            let b = rng.gen_bool(0.5);
            shadow[i] = b;
            bv.set(i, b);
        }
        for (i, &b) in shadow.iter().enumerate() {
            assert_eq!(bv.get(i), b);
        }
        let shadow_ones = shadow.iter().filter(|&&b| b).count();
        let word_ones: u32 = bv.words().iter().map(|w| w.count_ones()).sum();
        assert_eq!(word_ones as usize, shadow_ones);
        assert_eq!(bv.count_ones_range(0, n), shadow_ones);
    }

    #[test]
    fn count_ones_range_against_bit_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let bv = BitVector::from_bits((0..4096).map(|_| rng.gen_bool(0.3)));
        for _ in 0..100 {
            let a = rng.gen_range(0..=4096);
            let b = rng.gen_range(0..=4096);
            let (s, e) = (a.min(b), a.max(b));
            let expected = (s..e).filter(|&i| bv.get(i)).count();
            assert_eq!(bv.count_ones_range(s, e), expected, "{s}..{e}");
            assert_eq!(bv.count_ones_range(s, s), 0);
        }
        assert_eq!(BitVector::new(512, true).count_ones_range(0, 512), 512);
    }

    #[test]
    fn from_words_rejects_bad_input() {
        assert!(BitVector::from_words(65, vec![0]).is_err());
        assert!(BitVector::from_words(65, vec![0, 2]).is_err());
        assert!(BitVector::from_words(65, vec![0, 1]).is_ok());
    }

    #[test]
    fn file_format_layout() {
        let mut bv = BitVector::new(70, false);
        bv.set(0, true);
        bv.set(69, true);
        let mut buf = Vec::new();
        bv.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 16);
        assert_eq!(&buf[..8], &70u64.to_le_bytes());
        assert_eq!(&buf[8..16], &1u64.to_le_bytes());
        assert_eq!(&buf[16..], &(1u64 << 5).to_le_bytes());
        assert_eq!(BitVector::read_from(&buf[..]).unwrap(), bv);
        assert!(BitVector::read_from(&buf[..20]).is_err());
    }
}
