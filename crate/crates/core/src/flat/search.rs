//! Locating the L2 block inside a flat L1 block.
//!
//! An entry stores `c_1..=c_7`, the ones before L2 blocks 1 to 7 of its L1
//! block (`c_0 = 0` is implicit). Given a 1-based rank `r` within the L1
//! block, every strategy returns `|{k in 1..=7 : c_k < r}|`, the index of the
//! L2 block holding the `r`-th one.

use super::FlatL12Entry;

/// Uniform binary search over the 1-based slots `1..2^levels`, where
/// `below(k)` holds for a prefix of the slots. Returns the length of that
/// prefix after exactly `levels` calls to `below`.
#[inline(always)]
pub(crate) fn uniform_search(levels: u32, mut below: impl FnMut(usize) -> bool) -> usize {
    let mut pos = 0;
    let mut step = 1usize << (levels - 1);
    while step > 0 {
        if below(pos + step) {
            pos += step;
        }
        step >>= 1;
    }
    pos
}

/// Scans `c_1, c_2, ...` until one is at least `r`.
#[inline]
pub fn search_l2_linear(entry: FlatL12Entry, r: usize) -> usize {
    linear(|k| entry.l2(k), r)
}

#[inline(always)]
pub(crate) fn linear(cumulative: impl Fn(usize) -> usize, r: usize) -> usize {
    let mut k = 1;
    while k < 8 && cumulative(k) < r {
        k += 1;
    }
    k - 1
}

/// Uniform binary search over the seven counts: always three comparisons,
/// against `c_4`, then `c_2` or `c_6`, then one odd slot.
#[inline]
pub fn search_l2_binary(entry: FlatL12Entry, r: usize) -> usize {
    binary(|k| entry.l2(k), r)
}

/// [`search_l2_binary`] with a caller-supplied `less(c_k, r)` comparator.
pub fn search_l2_binary_by(entry: FlatL12Entry, r: usize, mut less: impl FnMut(u16, usize) -> bool) -> usize {
    uniform_search(3, |k| less(entry.l2(k) as u16, r))
}

#[inline(always)]
pub(crate) fn binary(cumulative: impl Fn(usize) -> usize, r: usize) -> usize {
    uniform_search(3, |k| cumulative(k) < r)
}

/// Compares all seven counts at once: unpacks them into 16-bit lanes and
/// counts the lanes with `c_k > r - 1`.
#[inline]
pub fn search_l2_parallel(entry: FlatL12Entry, r: usize) -> usize {
    parallel(entry, true, r)
}

#[inline(always)]
pub(crate) fn parallel(entry: FlatL12Entry, bit: bool, r: usize) -> usize {
    #[cfg(all(target_arch = "x86_64", target_feature = "ssse3"))]
    {
        // SAFETY: ssse3 is enabled at compile time.
        unsafe { simd::search(entry.packed_l2(), bit, r) }
    }
    #[cfg(not(all(target_arch = "x86_64", target_feature = "ssse3")))]
    {
        swar::search(entry.packed_l2(), bit, r)
    }
}

/// Splits seven packed 12-bit values (bits `[12k, 12k + 12)` of `packed`)
/// into seven 16-bit values.
pub fn unpack_12_to_16(packed: u128) -> [u16; 7] {
    let lanes = swar::unpack(packed);
    std::array::from_fn(|k| (lanes >> (16 * k)) as u16)
}

/// Packs seven 12-bit values, the inverse of [`unpack_12_to_16`].
pub fn pack_12(values: [u16; 7]) -> u128 {
    values
        .iter()
        .enumerate()
        .fold(0u128, |acc, (k, &v)| acc | ((v as u128 & 0xFFF) << (12 * k)))
}

/// Cumulative counts of a full L1 block: lane `k` holds `512 (k + 1)`,
/// lane 7 holds 0. Subtracting the one-counts gives zero-counts.
const FULL_BLOCK_LANES: u128 = {
    let mut v = 0u128;
    let mut k = 0;
    while k < 7 {
        v |= (512 * (k as u128 + 1)) << (16 * k);
        k += 1;
    }
    v
};

/// Portable version working on a `u128` as eight 16-bit lanes.
pub mod swar {
    use super::FULL_BLOCK_LANES;

    const LANE_ONES: u128 = 0x0001_0001_0001_0001_0001_0001_0001_0001;
    const LANE_MSBS: u128 = LANE_ONES << 15;

    /// Unpacks into eight 16-bit lanes (lane 7 is zero).
    ///
    /// Every three bytes hold two values: the first starts on a byte boundary
    /// and is the low 12 bits of a 16-bit read there; the second ends on a
    /// byte boundary and is a 16-bit read one byte later shifted right by 4.
    #[inline(always)]
    pub fn unpack(packed: u128) -> u128 {
        let bytes = packed.to_le_bytes();
        let mut lanes = 0u128;
        for pair in 0..4 {
            let b = 3 * pair;
            let even = u16::from_le_bytes([bytes[b], bytes[b + 1]]) & 0x0FFF;
            let odd = u16::from_le_bytes([bytes[b + 1], bytes[b + 2]]) >> 4;
            lanes |= (even as u128) << (32 * pair);
            lanes |= (odd as u128) << (32 * pair + 16);
        }
        lanes
    }

    /// Block index for rank `r` among the ones (`bit`) or zeros.
    #[inline(always)]
    pub fn search(packed: u128, bit: bool, r: usize) -> usize {
        debug_assert!((1..=4096).contains(&r));
        let mut lanes = unpack(packed);
        if !bit {
            lanes = FULL_BLOCK_LANES - lanes;
        }
        // lanes are < 2^12, so adding 0x8000 - r sets a lane's top bit
        // exactly when the lane is >= r, without carries between lanes
        let bias = (0x8000 - r as u128) * LANE_ONES;
        let at_least_r = ((lanes + bias) & LANE_MSBS).count_ones() as usize;
        7 - at_least_r
    }
}

/// SSSE3 version: byte shuffle, shift and mask, then a 16-bit compare.
#[cfg(target_arch = "x86_64")]
pub mod simd {
    use super::FULL_BLOCK_LANES;
    use std::arch::x86_64::*;

    pub fn available() -> bool {
        std::arch::is_x86_feature_detected!("ssse3")
    }

    /// # Safety
    /// The CPU must support SSSE3.
    #[inline]
    #[target_feature(enable = "ssse3")]
    pub unsafe fn unpack(packed: u128) -> __m128i {
        let v = _mm_set_epi64x((packed >> 64) as i64, packed as i64);
        let spread = _mm_shuffle_epi8(v, _mm_setr_epi8(0, 1, 1, 2, 3, 4, 4, 5, 6, 7, 7, 8, 9, 10, 10, 11));
        let low = _mm_and_si128(spread, _mm_setr_epi16(0x0FFF, 0, 0x0FFF, 0, 0x0FFF, 0, 0x0FFF, 0));
        let high = _mm_and_si128(_mm_srli_epi16(spread, 4), _mm_setr_epi16(0, -1, 0, -1, 0, -1, 0, -1));
        _mm_or_si128(low, high)
    }

    /// # Safety
    /// The CPU must support SSSE3.
    #[inline]
    #[target_feature(enable = "ssse3")]
    pub unsafe fn unpack_to_u128(packed: u128) -> u128 {
        let mut out = 0u128;
        _mm_storeu_si128(&mut out as *mut u128 as *mut __m128i, unpack(packed));
        out
    }

    /// # Safety
    /// The CPU must support SSSE3.
    #[inline]
    #[target_feature(enable = "ssse3")]
    pub unsafe fn search(packed: u128, bit: bool, r: usize) -> usize {
        let mut lanes = unpack(packed);
        if !bit {
            let full = _mm_set_epi64x((FULL_BLOCK_LANES >> 64) as i64, FULL_BLOCK_LANES as i64);
            lanes = _mm_sub_epi16(full, lanes);
        }
        let greater = _mm_cmpgt_epi16(lanes, _mm_set1_epi16((r - 1) as i16));
        // two mask bits per 16-bit lane
        let at_least_r = _mm_movemask_epi8(greater).count_ones() as usize / 2;
        7 - at_least_r
    }
}
