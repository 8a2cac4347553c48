use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use flatrank::{BitVector, SampleConfig, SearchStrategy};
use flatrank_cli::runner::run_once;
use flatrank_cli::workload::{gen_queries, Distribution, QueryKind, WorkloadSpec};
use flatrank_cli::{derive_seed, run_benchmark, write_csv, BenchConfig, BenchRecord, StructureKind};

/// Benchmark rank and select indexes on generated or stored bit vectors.
///
/// Without a subcommand, runs the benchmark and writes CSV.
#[derive(Parser)]
#[command(name = "flatrank", version, args_conflicts_with_subcommands = true)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,

    #[command(flatten)]
    bench: BenchArgs,
}

#[derive(Subcommand)]
enum Command {
    /// Run the benchmark (the default).
    Bench(BenchArgs),
    /// Write a generated bit vector to a file.
    Generate(GenerateArgs),
}

#[derive(Args, Clone)]
struct BenchArgs {
    /// Bit-vector sizes in bits; accepts `2^k`.
    #[arg(long = "size", value_delimiter = ',', value_parser = parse_size,
          default_values = ["2^20", "2^22", "2^24", "2^26"])]
    sizes: Vec<usize>,

    /// Percentages of ones, each in (0, 100).
    #[arg(long = "density", value_delimiter = ',', default_values = ["10", "50", "90"])]
    densities: Vec<f64>,

    #[arg(long = "distribution", value_delimiter = ',', default_values = ["uniform"])]
    distributions: Vec<Distribution>,

    /// Structures to benchmark: poppy, flat, wide.
    #[arg(long, value_delimiter = ',', default_values = ["poppy", "flat", "wide"])]
    structures: Vec<String>,

    /// Select searches for flat and wide: linear, binary, simd.
    #[arg(long, value_delimiter = ',', default_values = ["linear", "binary", "simd"])]
    strategies: Vec<SearchStrategy>,

    /// Query kinds: rank0, rank1, select0, select1.
    #[arg(long = "query-kinds", value_delimiter = ',', default_values = ["rank0", "rank1", "select0", "select1"])]
    query_kinds: Vec<QueryKind>,

    /// Queries per kind and run.
    #[arg(long, default_value_t = 1_000_000)]
    queries: usize,

    #[arg(long, default_value_t = 3)]
    runs: usize,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Output file; standard output when absent.
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Select samples: ones, zeros, both, none.
    #[arg(long, default_value = "both")]
    samples: SampleConfig,

    /// Build the optional L0 index of the flat structure.
    #[arg(long = "with-l0", default_value_t = false, action = clap::ArgAction::Set)]
    with_l0: bool,

    /// Benchmark a stored bit vector instead of generated ones (single run).
    #[arg(long)]
    vector: Option<PathBuf>,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_parser = parse_size)]
    size: usize,
    #[arg(long, default_value_t = 50.0)]
    density: f64,
    #[arg(long, default_value = "uniform")]
    distribution: Distribution,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

fn parse_size(s: &str) -> Result<usize, String> {
    let s = s.trim();
    if let Some(exp) = s.strip_prefix("2^") {
        let exp: u32 = exp.parse().map_err(|e| format!("bad exponent in `{s}`: {e}"))?;
        return 1usize
            .checked_shl(exp)
            .filter(|_| exp < usize::BITS)
            .ok_or_else(|| format!("`{s}` does not fit in {} bits", usize::BITS));
    }
    s.parse().map_err(|e| format!("bad size `{s}`: {e}"))
}

fn bench(args: BenchArgs) -> Result<()> {
    let structures = args
        .structures
        .iter()
        .map(|s| s.parse::<StructureKind>())
        .collect::<Result<Vec<_>, _>>()?;
    let cfg = BenchConfig {
        structures,
        strategies: args.strategies.clone(),
        samples: args.samples,
        with_l0: args.with_l0,
        runs: args.runs,
        ..BenchConfig::default()
    };

    let mut records: Vec<BenchRecord> = Vec::new();
    if let Some(path) = &args.vector {
        let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        let bv = BitVector::read_from(BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
        if bv.is_empty() {
            bail!("{} holds an empty bit vector", path.display());
        }
        let spec = WorkloadSpec {
            n: bv.len(),
            density: 100.0 * bv.count_ones() as f64 / bv.len() as f64,
            distribution: Distribution::Uniform,
            num_queries: args.queries,
            seed: args.seed,
            query_kinds: args.query_kinds.clone(),
        };
        let workload = gen_queries(&spec, &bv, derive_seed(args.seed, u64::MAX))?;
        records.extend(run_once(&spec, &cfg, &bv, &workload, "0")?);
    } else {
        for &n in &args.sizes {
            for &density in &args.densities {
                for &distribution in &args.distributions {
                    let spec = WorkloadSpec {
                        n,
                        density,
                        distribution,
                        num_queries: args.queries,
                        seed: args.seed,
                        query_kinds: args.query_kinds.clone(),
                    };
                    records.extend(run_benchmark(&spec, &cfg)?);
                }
            }
        }
    }

    match &args.csv {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("creating {}", path.display()))?;
            write_csv(BufWriter::new(file), &records)?;
        }
        None => {
            let stdout = io::stdout();
            write_csv(stdout.lock(), &records)?;
        }
    }
    Ok(())
}

fn generate(args: GenerateArgs) -> Result<()> {
    let spec = WorkloadSpec {
        n: args.size,
        density: args.density,
        distribution: args.distribution,
        seed: args.seed,
        ..WorkloadSpec::default()
    };
    spec.validate()?;
    let bv = spec.generate(args.seed);
    let file = File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    let mut out = BufWriter::new(file);
    bv.write_to(&mut out)?;
    out.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Some(Command::Bench(args)) => bench(args),
        Some(Command::Generate(args)) => generate(args),
        None => bench(cli.bench),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
