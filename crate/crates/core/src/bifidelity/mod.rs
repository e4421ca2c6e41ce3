//! Greedy point selection on low-fidelity snapshots, the Gramian projection
//! that transfers coefficients to high-fidelity snapshots, and the practical
//! error estimators.

mod estimators;
mod selection;
mod surrogate;

pub use estimators::{
    error_bound, inplane_re, lf_relative_distance, median, similarity_rs, BoundConstants,
    DiagnosticRow, ErrorDiagnostics, Ratio,
};
pub use selection::{gramian, select_points, SelectionResult, SnapshotSet, DEFAULT_PIVOT_TOL};
pub use surrogate::{weighted_mean, BiFiSurrogate, LowFidelity};

#[cfg(test)]
mod tests;
