//! Benchmark helpers live in the bench targets; this crate exists to anchor them.
