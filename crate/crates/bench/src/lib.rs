//! Shared inputs for the benchmarks.

use selberg_core::spectrum::{build_table, trace_cutoff, SpectrumTable, WeightMode};

/// The unity-weight table covering `phi_s(x)`.
pub fn table_for(x: f64) -> SpectrumTable {
    build_table(trace_cutoff(x).max(3.5), &WeightMode::Unity).expect("table")
}
