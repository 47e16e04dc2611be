//! Criterion benchmarks for the kernel, the correction table and matrix assembly; see `benches/`.
