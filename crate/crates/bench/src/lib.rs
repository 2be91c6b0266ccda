//! Criterion benchmarks for probe-forge live in `benches/`.
