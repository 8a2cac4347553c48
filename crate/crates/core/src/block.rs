//! Scans inside a single 512-bit basic block.

use crate::bitvec::{low_mask, WORD_BITS};
use crate::probe::Probe;
use crate::samples::SampleCollector;
use crate::word::{select0_in_word, select_in_word};

/// Words per 512-bit basic block.
pub(crate) const WORDS_PER_BASIC: usize = 8;

/// Ones in `[first_word * 64, i)`; `i` must lie inside the vector.
#[inline(always)]
pub(crate) fn ones_before<P: Probe>(words: &[u64], first_word: usize, i: usize, probe: &mut P) -> usize {
    let last = i / WORD_BITS;
    let mut ones = 0;
    for &w in &words[first_word..last] {
        probe.word();
        ones += w.count_ones() as usize;
    }
    let rem = i % WORD_BITS;
    if rem != 0 {
        probe.word();
        ones += (words[last] & low_mask(rem)).count_ones() as usize;
    }
    ones
}

/// Position of the `r`-th `bit` at or after word `first_word`. The answer
/// must exist.
#[inline(always)]
pub(crate) fn select_from<P: Probe>(words: &[u64], first_word: usize, bit: bool, mut r: usize, probe: &mut P) -> usize {
    let mut wi = first_word;
    loop {
        probe.word();
        let w = words[wi];
        let count = if bit { w.count_ones() } else { w.count_zeros() } as usize;
        if r <= count {
            let pos = if bit {
                select_in_word(w, r as u32)
            } else {
                select0_in_word(w, r as u32)
            };
            return wi * WORD_BITS + pos as usize;
        }
        r -= count;
        wi += 1;
    }
}

/// Ones in each 512-bit basic block of `words` (the last one may be short).
pub(crate) fn basic_counts(words: &[u64]) -> Vec<u16> {
    #[cfg(all(target_arch = "x86_64", not(target_feature = "popcnt")))]
    {
        if std::arch::is_x86_feature_detected!("popcnt") {
            // SAFETY: popcnt support was just checked.
            return unsafe { basic_counts_popcnt(words) };
        }
    }
    basic_counts_generic(words)
}

#[inline(always)]
fn basic_counts_generic(words: &[u64]) -> Vec<u16> {
    let mut out = Vec::with_capacity(words.len().div_ceil(WORDS_PER_BASIC));
    let mut chunks = words.chunks_exact(WORDS_PER_BASIC);
    for chunk in &mut chunks {
        let chunk: &[u64; WORDS_PER_BASIC] = chunk.try_into().unwrap();
        out.push(chunk.iter().map(|w| w.count_ones() as u16).sum());
    }
    let rest = chunks.remainder();
    if !rest.is_empty() {
        out.push(rest.iter().map(|w| w.count_ones() as u16).sum());
    }
    out
}

#[cfg(all(target_arch = "x86_64", not(target_feature = "popcnt")))]
#[target_feature(enable = "popcnt")]
unsafe fn basic_counts_popcnt(words: &[u64]) -> Vec<u16> {
    basic_counts_generic(words)
}

/// Feeds one L1 block, starting at word `first`, to `samples` given the
/// counts of its basic blocks.
#[inline]
pub(crate) fn feed_block(samples: &mut SampleCollector, words: &[u64], first: usize, basic: &[u16]) {
    for (k, &ones) in basic.iter().enumerate() {
        let start = first + k * WORDS_PER_BASIC;
        let end = (start + WORDS_PER_BASIC).min(words.len());
        samples.feed_words(start, &words[start..end], ones as usize);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basic_counts_match_words() {
        let words: Vec<u64> = (0..21u64).map(|i| i.wrapping_mul(0x9E37_79B9_7F4A_7C15)).collect();
        let counts = basic_counts(&words);
        assert_eq!(counts.len(), 3);
        for (k, &c) in counts.iter().enumerate() {
            let expect: u32 = words[k * 8..(k * 8 + 8).min(21)].iter().map(|w| w.count_ones()).sum();
            assert_eq!(c as u32, expect);
        }
        assert!(basic_counts(&[]).is_empty());
    }
}
