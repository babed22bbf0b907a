//! Criterion benchmarks for the knzeta engine; see `benches/`.
