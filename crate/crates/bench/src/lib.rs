//! Criterion benchmarks of the nlac kernels; run them with `cargo bench -p nlac-bench`.
