use std::fmt;
use std::str::FromStr;

use crate::bitvec::{low_mask, WORD_BITS};
use crate::word::select_in_word;

/// Every `SAMPLE_RATE`-th occurrence of a bit value has its position stored.
pub const SAMPLE_RATE: usize = 8192;

/// Which bit values get select samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SampleConfig {
    None,
    #[default]
    Ones,
    Zeros,
    Both,
}

impl SampleConfig {
    pub fn ones(self) -> bool {
        matches!(self, Self::Ones | Self::Both)
    }

    pub fn zeros(self) -> bool {
        matches!(self, Self::Zeros | Self::Both)
    }
}

impl FromStr for SampleConfig {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "none" => Ok(Self::None),
            "ones" => Ok(Self::Ones),
            "zeros" => Ok(Self::Zeros),
            "both" => Ok(Self::Both),
            other => Err(format!(
                "unknown sample setting `{other}` (expected ones, zeros, both or none)"
            )),
        }
    }
}

impl fmt::Display for SampleConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::Ones => "ones",
            Self::Zeros => "zeros",
            Self::Both => "both",
        })
    }
}

/// Select samples: entry `s` is the absolute position of the
/// `(s * SAMPLE_RATE + 1)`-th one (or zero).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct Samples {
    pub ones: Option<Vec<u64>>,
    pub zeros: Option<Vec<u64>>,
}

impl Samples {
    #[inline]
    pub fn for_bit(&self, bit: bool) -> Option<&[u64]> {
        if bit {
            self.ones.as_deref()
        } else {
            self.zeros.as_deref()
        }
    }

    /// A position at or before the `j`-th occurrence of `bit`, if sampled.
    #[inline]
    pub fn start_hint(&self, bit: bool, j: usize) -> Option<usize> {
        self.for_bit(bit)
            .and_then(|s| s.get((j - 1) / SAMPLE_RATE))
            .map(|&p| p as usize)
    }

    pub fn count(&self) -> usize {
        self.ones.as_ref().map_or(0, Vec::len) + self.zeros.as_ref().map_or(0, Vec::len)
    }

    pub fn bytes(&self) -> usize {
        self.count() * std::mem::size_of::<u64>()
    }
}

/// Collects samples while an index builder walks the words in order.
pub(crate) struct SampleCollector {
    len: usize,
    ones: Option<Vec<u64>>,
    zeros: Option<Vec<u64>>,
    seen_ones: usize,
    seen_zeros: usize,
}

impl SampleCollector {
    pub fn new(cfg: SampleConfig, len: usize) -> Self {
        Self {
            len,
            ones: cfg.ones().then(Vec::new),
            zeros: cfg.zeros().then(Vec::new),
            seen_ones: 0,
            seen_zeros: 0,
        }
    }

    #[inline]
    pub fn is_active(&self) -> bool {
        self.ones.is_some() || self.zeros.is_some()
    }

    /// Feeds word `w` (at word index `wi`) of the bit vector.
    #[inline]
    pub fn feed(&mut self, wi: usize, word: u64) {
        let base = wi * WORD_BITS;
        if let Some(ones) = &mut self.ones {
            self.seen_ones = collect(ones, self.seen_ones, base, word);
        }
        if let Some(zeros) = &mut self.zeros {
            let valid = (self.len - base).min(WORD_BITS);
            let inverted = if valid == WORD_BITS {
                !word
            } else {
                !word & low_mask(valid)
            };
            self.seen_zeros = collect(zeros, self.seen_zeros, base, inverted);
        }
    }

    /// Feeds the words starting at word index `first_word` that together
    /// hold `ones` set bits. Words are only inspected one by one when a
    /// sample falls inside them.
    #[inline]
    pub fn feed_words(&mut self, first_word: usize, words: &[u64], ones: usize) {
        let base = first_word * WORD_BITS;
        let zeros = (self.len - base).min(words.len() * WORD_BITS) - ones;
        let ones_hit = self
            .ones
            .as_ref()
            .is_some_and(|v| self.seen_ones + ones > v.len() * SAMPLE_RATE);
        let zeros_hit = self
            .zeros
            .as_ref()
            .is_some_and(|v| self.seen_zeros + zeros > v.len() * SAMPLE_RATE);
        if ones_hit || zeros_hit {
            for (o, &w) in words.iter().enumerate() {
                self.feed(first_word + o, w);
            }
        } else {
            self.seen_ones += ones;
            self.seen_zeros += zeros;
        }
    }

    pub fn finish(mut self) -> Samples {
        for v in [&mut self.ones, &mut self.zeros].into_iter().flatten() {
            v.shrink_to_fit();
        }
        Samples {
            ones: self.ones,
            zeros: self.zeros,
        }
    }
}

#[inline]
fn collect(out: &mut Vec<u64>, seen: usize, base: usize, word: u64) -> usize {
    let count = word.count_ones() as usize;
    let target = out.len() * SAMPLE_RATE + 1;
    if seen + count >= target {
        let pos = base + select_in_word(word, (target - seen) as u32) as usize;
        out.push(pos as u64);
    }
    seen + count
}
