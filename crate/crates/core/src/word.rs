//! Population count and select on a single 64-bit word.
//!
//! Every select query in this crate ends with [`select_in_word`] on the word
//! that holds the answer. The default implementation is branch-free broadword
//! arithmetic. When the crate is compiled with the `bmi2` target feature
//! enabled (for example `-C target-cpu=native` on a recent x86-64 CPU) the
//! parallel bit deposit instruction is used instead. Both are exported so that
//! they can be tested and benchmarked side by side.

/// Number of set bits in `w`.
#[inline(always)]
pub fn popcount_word(w: u64) -> u32 {
    w.count_ones()
}

/// Position (least significant bit is 0) of the `j`-th set bit of `w`,
/// with `j` counted from 1.
///
/// Requires `1 <= j <= popcount_word(w)`; this is checked in debug builds
/// only.
#[inline(always)]
pub fn select_in_word(w: u64, j: u32) -> u32 {
    debug_assert!(
        j >= 1 && j <= w.count_ones(),
        "select_in_word: rank {j} out of range for {w:#x}"
    );
    #[cfg(all(target_arch = "x86_64", target_feature = "bmi2"))]
    {
        // SAFETY: the bmi2 target feature is enabled at compile time.
        unsafe { pdep::select(w, j) }
    }
    #[cfg(not(all(target_arch = "x86_64", target_feature = "bmi2")))]
    {
        broadword::select(w, j)
    }
}

/// Position of the `j`-th zero bit of `w` (1-based `j`).
#[inline(always)]
pub fn select0_in_word(w: u64, j: u32) -> u32 {
    select_in_word(!w, j)
}

/// Portable select using byte-wise prefix sums.
pub mod broadword {
    const ONES_STEP_8: u64 = 0x0101_0101_0101_0101;
    const MSBS_STEP_8: u64 = 0x8080_8080_8080_8080;

    /// `IN_BYTE[b][r]`: position of the `(r + 1)`-th set bit of byte `b`.
    static IN_BYTE: [[u8; 8]; 256] = build_in_byte_table();

    const fn build_in_byte_table() -> [[u8; 8]; 256] {
        let mut table = [[0u8; 8]; 256];
        let mut byte = 0;
        while byte < 256 {
            let mut rank = 0;
            let mut bit = 0;
            while bit < 8 {
                if (byte >> bit) & 1 == 1 {
                    table[byte][rank] = bit as u8;
                    rank += 1;
                }
                bit += 1;
            }
            byte += 1;
        }
        table
    }

    /// Position of the `j`-th set bit (1-based) of `w`.
    #[inline]
    pub fn select(w: u64, j: u32) -> u32 {
        let k = (j - 1) as u64;
        // popcount of every byte
        let mut s = w - ((w >> 1) & 0x5555_5555_5555_5555);
        s = (s & 0x3333_3333_3333_3333) + ((s >> 2) & 0x3333_3333_3333_3333);
        s = (s + (s >> 4)) & 0x0F0F_0F0F_0F0F_0F0F;
        // byte i now holds the number of ones in bytes 0..=i
        let prefix = s.wrapping_mul(ONES_STEP_8);
        // high bit of byte i is set iff prefix_i <= k
        let le = (((k * ONES_STEP_8) | MSBS_STEP_8) - prefix) & MSBS_STEP_8;
        let shift = le.count_ones() * 8;
        let before = ((prefix << 8) >> shift) & 0xFF;
        let byte = ((w >> shift) & 0xFF) as usize;
        shift + IN_BYTE[byte][(k - before) as usize] as u32
    }
}

/// Select through the BMI2 parallel bit deposit instruction.
#[cfg(target_arch = "x86_64")]
pub mod pdep {
    use std::arch::x86_64::_pdep_u64;

    /// Position of the `j`-th set bit (1-based) of `w`.
    ///
    /// # Safety
    /// The CPU must support BMI2.
    #[inline]
    #[target_feature(enable = "bmi2")]
    pub unsafe fn select(w: u64, j: u32) -> u32 {
        _pdep_u64(1u64 << (j - 1), w).trailing_zeros()
    }

    /// Whether the running CPU supports BMI2.
    pub fn available() -> bool {
        std::arch::is_x86_feature_detected!("bmi2")
    }
}
