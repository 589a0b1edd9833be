//! Criterion benchmarks for the sleepsig workspace live in `benches/`.
