//! Criterion benchmarks for the `flatrank` indexes; see `benches/`.
