//! Criterion benchmarks for dstsim; see `benches/`.
