//! Benchmark harness for the `flatrank` indexes: seeded workload generation,
//! timed construction and query phases, space accounting and CSV output.

pub mod report;
pub mod runner;
pub mod workload;

pub use report::{write_csv, BenchRecord};
pub use runner::{measure_space, run_benchmark, BenchConfig, StructureKind};
pub use workload::{gen_adversarial, gen_queries, gen_uniform, Distribution, QueryKind, QueryWorkload, WorkloadSpec};

/// Errors raised by the harness.
#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid workload: {0}")]
    InvalidSpec(String),

    #[error("cannot generate {kind} queries: the bit vector has no {bit}-bits")]
    NoTargetBits { kind: QueryKind, bit: u8 },

    #[error("unknown structure `{name}` (valid: {valid})")]
    UnknownStructure { name: String, valid: String },

    #[error(transparent)]
    Index(#[from] flatrank::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

/// SplitMix64 step, used to derive independent seeds from a master seed.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed.wrapping_add(stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}
