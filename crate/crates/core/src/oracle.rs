//! Brute-force rank and select, one bit at a time.
//!
//! These functions only use [`BitVector::get`] and never touch word-level
//! code, so they serve as ground truth for every index in the crate.

use crate::bitvec::BitVector;
use crate::error::{Error, Result};

/// Number of positions `p < i` with `bv.get(p) == bit`.
pub fn naive_rank(bv: &BitVector, bit: bool, i: usize) -> Result<usize> {
    if i > bv.len() {
        return Err(Error::OutOfRange {
            index: i,
            len: bv.len(),
        });
    }
    Ok((0..i).filter(|&p| bv.get(p) == bit).count())
}

/// Position of the `j`-th occurrence (1-based) of `bit`.
pub fn naive_select(bv: &BitVector, bit: bool, j: usize) -> Result<usize> {
    if j >= 1 {
        let mut seen = 0;
        for p in 0..bv.len() {
            if bv.get(p) == bit {
                seen += 1;
                if seen == j {
                    return Ok(p);
                }
            }
        }
    }
    Err(Error::RankDoesNotExist {
        bit: bit as u8,
        rank: j,
        available: bv.iter().filter(|&b| b == bit).count(),
    })
}

/// Answers to every rank and select query on `bv`, precomputed in one scan.
///
/// Produces the same values as [`naive_rank`] and [`naive_select`]; tests use
/// it when they ask many queries on the same vector.
#[derive(Debug, Clone)]
pub struct NaiveTables {
    /// `rank1[i]` = ones in `[0, i)`, for `i` in `0..=len`.
    pub rank1: Vec<usize>,
    /// `select1[j - 1]` = position of the `j`-th one.
    pub select1: Vec<usize>,
    /// `select0[j - 1]` = position of the `j`-th zero.
    pub select0: Vec<usize>,
}

impl NaiveTables {
    pub fn new(bv: &BitVector) -> Self {
        let mut rank1 = Vec::with_capacity(bv.len() + 1);
        let mut select1 = Vec::new();
        let mut select0 = Vec::new();
        rank1.push(0);
        for p in 0..bv.len() {
            if bv.get(p) {
                select1.push(p);
            } else {
                select0.push(p);
            }
            rank1.push(select1.len());
        }
        Self {
            rank1,
            select1,
            select0,
        }
    }

    pub fn rank(&self, bit: bool, i: usize) -> usize {
        if bit {
            self.rank1[i]
        } else {
            i - self.rank1[i]
        }
    }

    pub fn select(&self, bit: bool, j: usize) -> usize {
        if bit {
            self.select1[j - 1]
        } else {
            self.select0[j - 1]
        }
    }

    pub fn count(&self, bit: bool) -> usize {
        if bit {
            self.select1.len()
        } else {
            self.select0.len()
        }
    }
}
