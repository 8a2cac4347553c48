use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use flatrank::BitVector;
use rand::distributions::{Bernoulli, Distribution as _};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{derive_seed, BenchError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Distribution {
    /// Every bit is one with probability `density / 100`.
    Uniform,
    /// 99 % of the ones in the last `density` percent of the vector, the
    /// remaining 1 % in the part before.
    Adversarial,
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uniform => "uniform",
            Self::Adversarial => "adversarial",
        })
    }
}

impl FromStr for Distribution {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "adversarial" => Ok(Self::Adversarial),
            other => Err(format!(
                "unknown distribution `{other}` (expected uniform or adversarial)"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum QueryKind {
    Rank0,
    Rank1,
    Select0,
    Select1,
}

impl QueryKind {
    pub const ALL: [QueryKind; 4] = [Self::Rank0, Self::Rank1, Self::Select0, Self::Select1];

    pub fn is_select(self) -> bool {
        matches!(self, Self::Select0 | Self::Select1)
    }

    pub fn bit(self) -> bool {
        matches!(self, Self::Rank1 | Self::Select1)
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Rank0 => "rank0",
            Self::Rank1 => "rank1",
            Self::Select0 => "select0",
            Self::Select1 => "select1",
        }
    }
}

impl fmt::Display for QueryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for QueryKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown query kind `{s}` (expected rank0, rank1, select0 or select1)"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkloadSpec {
    /// Bit-vector length.
    pub n: usize,
    /// Percentage of ones, in `(0, 100)`.
    pub density: f64,
    pub distribution: Distribution,
    /// Queries per kind.
    pub num_queries: usize,
    pub seed: u64,
    pub query_kinds: Vec<QueryKind>,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        Self {
            n: 1 << 20,
            density: 50.0,
            distribution: Distribution::Uniform,
            num_queries: 1_000_000,
            seed: 0,
            query_kinds: QueryKind::ALL.to_vec(),
        }
    }
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.n == 0 {
            return Err(BenchError::InvalidSpec(
                "the bit vector must hold at least one bit".into(),
            ));
        }
        if !(self.density > 0.0 && self.density < 100.0) {
            return Err(BenchError::InvalidSpec(format!(
                "density {} is outside the open interval (0, 100)",
                self.density
            )));
        }
        Ok(())
    }

    /// Bit vector for this spec's distribution.
    pub fn generate(&self, seed: u64) -> BitVector {
        match self.distribution {
            Distribution::Uniform => gen_uniform(self.n, self.density, seed),
            Distribution::Adversarial => gen_adversarial(self.n, self.density, seed),
        }
    }
}

fn fill_bernoulli(bv: &mut BitVector, range: std::ops::Range<usize>, p: f64, rng: &mut ChaCha8Rng) {
    if range.is_empty() || p <= 0.0 {
        return;
    }
    let coin = Bernoulli::new(p.min(1.0)).expect("probability in [0, 1]");
    for i in range {
        if coin.sample(rng) {
            bv.set(i, true);
        }
    }
}

/// Each bit is one independently with probability `density / 100`.
pub fn gen_uniform(n: usize, density: f64, seed: u64) -> BitVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bv = BitVector::new(n, false);
    fill_bernoulli(&mut bv, 0..n, density / 100.0, &mut rng);
    bv
}

/// Sparse prefix, dense suffix: of the `density`% ones, 99 % land in the
/// last `density`% of the positions and 1 % in the prefix before it. Within
/// each region every bit is set independently with the region's rate.
pub fn gen_adversarial(n: usize, density: f64, seed: u64) -> BitVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bv = BitVector::new(n, false);
    let ones = n as f64 * density / 100.0;
    let boundary = ((n as f64 * (100.0 - density) / 100.0).ceil() as usize).min(n);
    if boundary > 0 {
        fill_bernoulli(&mut bv, 0..boundary, 0.01 * ones / boundary as f64, &mut rng);
    }
    if boundary < n {
        fill_bernoulli(&mut bv, boundary..n, 0.99 * ones / (n - boundary) as f64, &mut rng);
    }
    bv
}

/// Queries materialized before any index is built.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryWorkload {
    pub seed: u64,
    pub n: usize,
    pub density: f64,
    pub distribution: Distribution,
    /// Rank positions are uniform in `[0, n]`; select ranks are uniform in
    /// `[1, count]` of the target bit.
    pub queries: BTreeMap<QueryKind, Vec<usize>>,
}

/// Generates `spec.num_queries` queries of every kind in `spec.query_kinds`.
pub fn gen_queries(spec: &WorkloadSpec, bv: &BitVector, seed: u64) -> Result<QueryWorkload, BenchError> {
    let ones = bv.count_ones();
    let mut queries = BTreeMap::new();
    for &kind in &spec.query_kinds {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, kind as u64));
        let list: Vec<usize> = if kind.is_select() {
            let available = if kind.bit() { ones } else { bv.len() - ones };
            if available == 0 {
                return Err(BenchError::NoTargetBits {
                    kind,
                    bit: kind.bit() as u8,
                });
            }
            (0..spec.num_queries).map(|_| rng.gen_range(1..=available)).collect()
        } else {
            (0..spec.num_queries).map(|_| rng.gen_range(0..=bv.len())).collect()
        };
        queries.insert(kind, list);
    }
    Ok(QueryWorkload {
        seed,
        n: bv.len(),
        density: spec.density,
        distribution: spec.distribution,
        queries,
    })
}
