//! Criterion benchmarks for `silab-core` live in `benches/`.
