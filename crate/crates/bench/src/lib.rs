//! Criterion benchmarks for gaussmode; see `benches/`.
