//! Benchmark harness behind the `cpnet bench` subcommand: grid expansion,
//! per-cell timing of the containment kernel, CSV assembly and the
//! zero-intercept linear fit. Lives in a library so the pieces are testable
//! without spawning the binary.

pub mod bench;

pub use bench::{
    fit, run_benchmark, write_csv, BenchConfig, BenchRecord, FitError, FitReport, GridSpec, Split,
};
