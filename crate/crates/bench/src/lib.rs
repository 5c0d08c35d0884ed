//! Criterion benchmarks for the hot paths of `spinlab-core`; see `benches/`.
