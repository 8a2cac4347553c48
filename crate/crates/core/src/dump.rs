//! Binary index dumps.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic   [u8; 4]  "FRIX"
//! version u16      1
//! kind    u8       1 = flat, 2 = wide
//! flags   u8       bit 0: L0 present, bit 1: one-samples, bit 2: zero-samples
//! len     u64      bit-vector length
//! ones    u64      ones in the bit vector
//! param   u64      flat: log2 of the L0 block size; wide: 0
//! then each present array as a u64 element count followed by its elements
//! ```

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::samples::Samples;

pub(crate) const MAGIC: [u8; 4] = *b"FRIX";
pub(crate) const VERSION: u16 = 1;

pub(crate) const FLAG_L0: u8 = 1;
pub(crate) const FLAG_ONES: u8 = 2;
pub(crate) const FLAG_ZEROS: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub(crate) enum Kind {
    Flat = 1,
    Wide = 2,
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Header {
    pub kind: Kind,
    pub flags: u8,
    pub len: u64,
    pub ones: u64,
    pub param: u64,
}

impl Header {
    pub fn write<W: Write>(&self, out: &mut W) -> Result<()> {
        out.write_all(&MAGIC)?;
        out.write_all(&VERSION.to_le_bytes())?;
        out.write_all(&[self.kind as u8, self.flags])?;
        for v in [self.len, self.ones, self.param] {
            out.write_all(&v.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read<R: Read>(input: &mut R, expected: Kind) -> Result<Self> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if magic != MAGIC {
            return Err(Error::Format("not an index dump (bad magic)".into()));
        }
        let mut buf2 = [0u8; 2];
        input.read_exact(&mut buf2)?;
        let version = u16::from_le_bytes(buf2);
        if version != VERSION {
            return Err(Error::Format(format!("unsupported dump version {version}")));
        }
        input.read_exact(&mut buf2)?;
        if buf2[0] != expected as u8 {
            return Err(Error::Format(format!(
                "dump holds index kind {}, expected {}",
                buf2[0], expected as u8
            )));
        }
        Ok(Self {
            kind: expected,
            flags: buf2[1],
            len: read_u64(input)?,
            ones: read_u64(input)?,
            param: read_u64(input)?,
        })
    }
}

pub(crate) fn read_u64<R: Read>(input: &mut R) -> Result<u64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

pub(crate) fn write_array<W: Write, T: Copy, const N: usize>(
    out: &mut W,
    items: &[T],
    to_bytes: impl Fn(T) -> [u8; N],
) -> Result<()> {
    out.write_all(&(items.len() as u64).to_le_bytes())?;
    for &item in items {
        out.write_all(&to_bytes(item))?;
    }
    Ok(())
}

pub(crate) fn read_array<R: Read, T, const N: usize>(
    input: &mut R,
    expected_len: Option<usize>,
    from_bytes: impl Fn([u8; N]) -> T,
) -> Result<Vec<T>> {
    let count = read_u64(input)? as usize;
    if let Some(expected) = expected_len {
        if count != expected {
            return Err(Error::Format(format!(
                "array holds {count} entries, expected {expected}"
            )));
        }
    }
    // cap the up-front allocation; a corrupt count fails on read instead
    let mut items = Vec::with_capacity(count.min(1 << 20));
    let mut buf = [0u8; N];
    for _ in 0..count {
        input.read_exact(&mut buf)?;
        items.push(from_bytes(buf));
    }
    Ok(items)
}

pub(crate) fn sample_flags(samples: &Samples) -> u8 {
    (if samples.ones.is_some() { FLAG_ONES } else { 0 }) | (if samples.zeros.is_some() { FLAG_ZEROS } else { 0 })
}

pub(crate) fn write_samples<W: Write>(out: &mut W, samples: &Samples) -> Result<()> {
    for s in [&samples.ones, &samples.zeros].into_iter().flatten() {
        write_array(out, s, u64::to_le_bytes)?;
    }
    Ok(())
}

pub(crate) fn read_samples<R: Read>(input: &mut R, flags: u8) -> Result<Samples> {
    let mut samples = Samples::default();
    if flags & FLAG_ONES != 0 {
        samples.ones = Some(read_array(input, None, u64::from_le_bytes)?);
    }
    if flags & FLAG_ZEROS != 0 {
        samples.zeros = Some(read_array(input, None, u64::from_le_bytes)?);
    }
    for s in [&samples.ones, &samples.zeros].into_iter().flatten() {
        if !s.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Format("sample positions are not increasing".into()));
        }
    }
    Ok(samples)
}
