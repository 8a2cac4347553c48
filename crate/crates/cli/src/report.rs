use std::io::Write;

use serde::Serialize;

use crate::workload::{QueryKind, WorkloadSpec};
use crate::BenchError;

/// One CSV row. `construction_s` and `ns_per_query` are the only
/// timing-dependent columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub structure: String,
    pub strategy: String,
    pub query_kind: String,
    pub n: usize,
    pub density: f64,
    pub distribution: String,
    pub construction_s: f64,
    pub ns_per_query: f64,
    pub index_bytes: usize,
    pub overhead_pct: f64,
    pub checksum: u64,
    pub seed: u64,
    pub run_id: String,
}

/// CSV header, in column order.
pub const COLUMNS: [&str; 13] = [
    "structure",
    "strategy",
    "query_kind",
    "n",
    "density",
    "distribution",
    "construction_s",
    "ns_per_query",
    "index_bytes",
    "overhead_pct",
    "checksum",
    "seed",
    "run_id",
];

/// Columns whose values depend on wall-clock time.
pub const TIMING_COLUMNS: [&str; 2] = ["construction_s", "ns_per_query"];

impl BenchRecord {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        structure: &str,
        strategy: &str,
        kind: QueryKind,
        spec: &WorkloadSpec,
        construction_s: f64,
        ns_per_query: f64,
        index_bytes: usize,
        checksum: u64,
        run_id: &str,
    ) -> Self {
        let mut record = Self {
            structure: structure.into(),
            strategy: strategy.into(),
            query_kind: kind.name().into(),
            n: spec.n,
            density: spec.density,
            distribution: spec.distribution.to_string(),
            construction_s,
            ns_per_query,
            index_bytes: 0,
            overhead_pct: 0.0,
            checksum,
            seed: spec.seed,
            run_id: run_id.into(),
        };
        record.set_index_bytes(index_bytes);
        record
    }

    /// Sets the index size and the derived overhead percentage.
    pub fn set_index_bytes(&mut self, bytes: usize) {
        self.index_bytes = bytes;
        self.overhead_pct = 100.0 * (bytes * 8) as f64 / self.n as f64;
    }
}

/// Writes a header row and one row per record.
pub fn write_csv<W: Write>(out: W, records: &[BenchRecord]) -> Result<(), BenchError> {
    let mut writer = csv::Writer::from_writer(out);
    if records.is_empty() {
        writer.write_record(COLUMNS)?;
    }
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush().map_err(csv::Error::from)?;
    Ok(())
}
