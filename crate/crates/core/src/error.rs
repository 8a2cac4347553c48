use std::io;

/// Errors reported by checked queries, builders and file I/O.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("position {index} is out of range for a bit vector of length {len}")]
    OutOfRange { index: usize, len: usize },

    #[error("no {bit}-bit of rank {rank} exists (the bit vector holds {available})")]
    RankDoesNotExist { bit: u8, rank: usize, available: usize },

    #[error("bit vector of {len} bits exceeds the {max}-bit limit of an index without L0 blocks")]
    TooLarge { len: usize, max: usize },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
