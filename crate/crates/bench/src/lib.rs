//! Criterion benchmarks for `qperc-core`; see `benches/core.rs`.
