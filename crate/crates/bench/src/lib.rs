//! Benchmark-only crate; see `benches/election.rs`.
