//! Benchmark-only package; see `benches/flow.rs`.
