//! Benchmark harness for the robust RCPSP toolkit; see `benches/`.
