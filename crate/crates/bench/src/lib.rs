//! Criterion benchmarks for `qpath-core`; see `benches/`.
