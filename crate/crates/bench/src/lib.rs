//! Criterion benchmarks for the core stages; see `benches/pipeline.rs`.
