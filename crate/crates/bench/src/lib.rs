//! Benchmarks for the apkin solvers live in `benches/`.
