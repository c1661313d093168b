//! Criterion benchmarks for `stickslip`; see `benches/simulate.rs`.
