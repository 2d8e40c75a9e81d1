//! Criterion benchmarks for the dynamics kernels live in `benches/`.
