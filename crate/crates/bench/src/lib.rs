//! Criterion benchmarks for biphoton-core; see `benches/pipeline.rs`.
