//! Benchmarks for mai-core live in `benches/`.
