use std::fmt;
use std::hint::black_box;
use std::str::FromStr;
use std::time::Instant;

use flatrank::{
    BitVector, FlatConfig, FlatIndex, PoppyIndex, RankSelect, SampleConfig, SearchStrategy, WideConfig, WideIndex,
};

use crate::report::BenchRecord;
use crate::workload::{gen_queries, QueryKind, QueryWorkload, WorkloadSpec};
use crate::{derive_seed, BenchError};

/// Index structures the harness can drive. Further implementations of
/// [`RankSelect`] plug in by adding a variant and a `build` arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StructureKind {
    Poppy,
    Flat,
    Wide,
}

impl StructureKind {
    pub const ALL: [StructureKind; 3] = [Self::Poppy, Self::Flat, Self::Wide];

    pub fn name(self) -> &'static str {
        match self {
            Self::Poppy => "poppy",
            Self::Flat => "flat",
            Self::Wide => "wide",
        }
    }

    /// Whether select queries depend on a [`SearchStrategy`].
    pub fn has_strategies(self) -> bool {
        !matches!(self, Self::Poppy)
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for StructureKind {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| BenchError::UnknownStructure {
                name: s.to_string(),
                valid: Self::ALL.map(Self::name).join(", "),
            })
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub structures: Vec<StructureKind>,
    pub strategies: Vec<SearchStrategy>,
    pub samples: SampleConfig,
    pub with_l0: bool,
    pub runs: usize,
    /// Minimum construction throughput (bytes of bit vector per second)
    /// below which a warning is printed.
    pub min_build_throughput: f64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            structures: StructureKind::ALL.to_vec(),
            strategies: SearchStrategy::ALL.to_vec(),
            samples: SampleConfig::Both,
            with_l0: false,
            runs: 3,
            min_build_throughput: (1u64 << 30) as f64,
        }
    }
}

enum Built<'a> {
    Poppy(PoppyIndex<'a>),
    Flat(FlatIndex<'a>),
    Wide(WideIndex<'a>),
}

impl<'a> Built<'a> {
    fn build(kind: StructureKind, bv: &'a BitVector, cfg: &BenchConfig) -> Result<Self, BenchError> {
        Ok(match kind {
            StructureKind::Poppy => Self::Poppy(PoppyIndex::with_samples(bv, cfg.samples)),
            StructureKind::Flat => Self::Flat(FlatIndex::with_config(
                bv,
                FlatConfig {
                    with_l0: cfg.with_l0,
                    samples: cfg.samples,
                    strategy: SearchStrategy::default(),
                },
            )?),
            StructureKind::Wide => Self::Wide(WideIndex::with_config(
                bv,
                WideConfig {
                    samples: cfg.samples,
                    strategy: SearchStrategy::default(),
                },
            )),
        })
    }

    fn set_strategy(&mut self, strategy: SearchStrategy) {
        match self {
            Self::Poppy(_) => {}
            Self::Flat(idx) => idx.set_strategy(strategy),
            Self::Wide(idx) => idx.set_strategy(strategy),
        }
    }

    fn space_bytes(&self) -> usize {
        match self {
            Self::Poppy(idx) => measure_space(idx),
            Self::Flat(idx) => measure_space(idx),
            Self::Wide(idx) => measure_space(idx),
        }
    }

    fn run(&self, kind: QueryKind, queries: &[usize]) -> (f64, u64) {
        match self {
            Self::Poppy(idx) => time_queries(idx, kind, queries),
            Self::Flat(idx) => time_queries(idx, kind, queries),
            Self::Wide(idx) => time_queries(idx, kind, queries),
        }
    }
}

/// Exact heap bytes of an index, excluding the bit vector.
pub fn measure_space<R: RankSelect>(index: &R) -> usize {
    index.space_usage().total_bytes()
}

/// Order-sensitive checksum of query answers.
#[inline(always)]
fn mix(acc: u64, answer: usize) -> u64 {
    acc.wrapping_mul(0x100_0000_01B3).wrapping_add(answer as u64)
}

/// Runs all queries and returns (ns per query, checksum of the answers).
fn time_queries<R: RankSelect>(index: &R, kind: QueryKind, queries: &[usize]) -> (f64, u64) {
    let mut checksum = 0u64;
    let start = Instant::now();
    match kind {
        QueryKind::Rank0 => queries.iter().for_each(|&i| checksum = mix(checksum, index.rank0(i))),
        QueryKind::Rank1 => queries.iter().for_each(|&i| checksum = mix(checksum, index.rank1(i))),
        QueryKind::Select0 => queries.iter().for_each(|&j| checksum = mix(checksum, index.select0(j))),
        QueryKind::Select1 => queries.iter().for_each(|&j| checksum = mix(checksum, index.select1(j))),
    }
    let elapsed = start.elapsed();
    black_box(checksum);
    let ns = if queries.is_empty() {
        0.0
    } else {
        elapsed.as_nanos() as f64 / queries.len() as f64
    };
    (ns, checksum)
}

/// Benchmarks every configured structure on `runs` fresh workloads.
///
/// Each run draws a new bit vector and new queries from a seed derived from
/// `spec.seed` and the run number, builds every structure (timed), then asks
/// all queries of each kind (timed). Per-run records come first, followed by
/// one `mean` record per (structure, strategy, query kind).
pub fn run_benchmark(spec: &WorkloadSpec, cfg: &BenchConfig) -> Result<Vec<BenchRecord>, BenchError> {
    spec.validate()?;
    let mut records = Vec::new();
    for run in 0..cfg.runs {
        let run_seed = derive_seed(spec.seed, run as u64);
        let bv = spec.generate(run_seed);
        let workload = gen_queries(spec, &bv, derive_seed(run_seed, u64::MAX))?;
        records.extend(run_once(spec, cfg, &bv, &workload, &run.to_string())?);
    }
    if cfg.runs > 0 {
        records.extend(mean_records(&records, cfg.runs));
    }
    Ok(records)
}

/// Benchmarks every configured structure on one given bit vector and query
/// workload (for replaying stored vectors).
pub fn run_once(
    spec: &WorkloadSpec,
    cfg: &BenchConfig,
    bv: &BitVector,
    workload: &QueryWorkload,
    run_id: &str,
) -> Result<Vec<BenchRecord>, BenchError> {
    let mut records = Vec::new();
    for &structure in &cfg.structures {
        let start = Instant::now();
        let mut index = Built::build(structure, bv, cfg)?;
        let construction_s = start.elapsed().as_secs_f64();
        let throughput = (bv.len() / 8) as f64 / construction_s;
        if bv.len() >= 1 << 24 && throughput < cfg.min_build_throughput {
            eprintln!(
                "warning: {structure} construction ran at {:.2} GiB/s on {} bits",
                throughput / (1u64 << 30) as f64,
                bv.len()
            );
        }
        let index_bytes = index.space_bytes();

        let record = |strategy: &str, kind: QueryKind, ns_per_query: f64, checksum: u64| {
            BenchRecord::new(
                structure.name(),
                strategy,
                kind,
                spec,
                construction_s,
                ns_per_query,
                index_bytes,
                checksum,
                run_id,
            )
        };
        for (&kind, queries) in &workload.queries {
            if kind.is_select() && structure.has_strategies() {
                for &strategy in &cfg.strategies {
                    index.set_strategy(strategy);
                    let (ns, checksum) = index.run(kind, queries);
                    records.push(record(strategy.name(), kind, ns, checksum));
                }
            } else {
                let (ns, checksum) = index.run(kind, queries);
                records.push(record("-", kind, ns, checksum));
            }
        }
    }
    Ok(records)
}

fn mean_records(records: &[BenchRecord], runs: usize) -> Vec<BenchRecord> {
    let per_run = records.len() / runs;
    (0..per_run)
        .map(|row| {
            let group: Vec<&BenchRecord> = (0..runs).map(|run| &records[run * per_run + row]).collect();
            let mean = |f: fn(&BenchRecord) -> f64| group.iter().map(|r| f(r)).sum::<f64>() / runs as f64;
            let mut out = group[0].clone();
            out.construction_s = mean(|r| r.construction_s);
            out.ns_per_query = mean(|r| r.ns_per_query);
            out.set_index_bytes(mean(|r| r.index_bytes as f64).round() as usize);
            out.checksum = group.iter().fold(0u64, |acc, r| acc.wrapping_add(r.checksum));
            out.run_id = "mean".into();
            out
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::workload::Distribution;

    fn small_spec() -> WorkloadSpec {
        WorkloadSpec {
            n: 300_000,
            density: 30.0,
            distribution: Distribution::Adversarial,
            num_queries: 2_000,
            seed: 99,
            query_kinds: QueryKind::ALL.to_vec(),
        }
    }

    #[test]
    fn unknown_structure_lists_valid_names() {
        let err = "rrr".parse::<StructureKind>().unwrap_err().to_string();
        assert!(err.contains("rrr") && err.contains("poppy, flat, wide"), "{err}");
    }

    #[test]
    fn zero_queries_still_time_construction() {
        let spec = WorkloadSpec {
            num_queries: 0,
            ..small_spec()
        };
        let records = run_benchmark(
            &spec,
            &BenchConfig {
                runs: 1,
                ..BenchConfig::default()
            },
        )
        .unwrap();
        assert!(!records.is_empty());
        for r in &records {
            assert_eq!(r.ns_per_query, 0.0);
            assert!(r.construction_s > 0.0);
        }
    }

    #[test]
    fn identical_seeds_give_identical_checksums() {
        let cfg = BenchConfig {
            runs: 2,
            ..BenchConfig::default()
        };
        let a = run_benchmark(&small_spec(), &cfg).unwrap();
        let b = run_benchmark(&small_spec(), &cfg).unwrap();
        let sums = |rs: &[BenchRecord]| rs.iter().map(|r| r.checksum).collect::<Vec<_>>();
        assert_eq!(sums(&a), sums(&b));
    }

    #[test]
    fn checksums_agree_across_structures() {
        let cfg = BenchConfig {
            runs: 2,
            ..BenchConfig::default()
        };
        let records = run_benchmark(&small_spec(), &cfg).unwrap();
        for run in ["0", "1", "mean"] {
            for kind in QueryKind::ALL {
                let sums: Vec<u64> = records
                    .iter()
                    .filter(|r| r.run_id == run && r.query_kind == kind.name())
                    .map(|r| r.checksum)
                    .collect();
                assert_eq!(sums.len(), if kind.is_select() { 7 } else { 3 });
                assert!(sums.iter().all(|&s| s == sums[0]), "{run} {kind}: {sums:?}");
            }
        }
    }

    #[test]
    fn space_matches_closed_forms() {
        let bv = BitVector::new(1 << 22, true);
        let flat = FlatIndex::with_config(
            &bv,
            FlatConfig {
                samples: SampleConfig::None,
                ..FlatConfig::default()
            },
        )
        .unwrap();
        assert_eq!(measure_space(&flat), 16384);
        let poppy = PoppyIndex::with_samples(&bv, SampleConfig::None);
        assert_eq!(poppy.space_usage().l12_bytes, 2048 * 8);
        let one_block = BitVector::new(65536, false);
        assert_eq!(measure_space(&WideIndex::new(&one_block)), 262);
    }
}
