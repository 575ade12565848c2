//! Spec files, run configuration, verification pipelines and reports for the
//! `frobenius-verify` command.

pub mod config;
pub mod pipeline;
pub mod report;
pub mod spec_file;

pub use config::{Config, Tolerances};
pub use pipeline::{run_catalog, run_theta, run_verify, ThetaParams};
pub use report::{Report, ThetaReport, Verdict};
pub use spec_file::{InputError, Manifold, ManifoldSpec};

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const MISMATCH: i32 = 1;
    pub const INPUT: i32 = 2;
    pub const NUMERIC: i32 = 3;
}

/// Exit code for a set of reports: any error verdict wins, then any
/// verdict that differs from its expected class.
pub fn exit_code(reports: &[Report]) -> i32 {
    if reports.iter().any(|r| r.verdict == Verdict::Error) {
        exit::NUMERIC
    } else if reports.iter().any(|r| r.matches_expectation() == Some(false)) {
        exit::MISMATCH
    } else {
        exit::OK
    }
}
