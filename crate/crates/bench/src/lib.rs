//! Criterion benchmarks for the bridge simulator live under `benches/`.
