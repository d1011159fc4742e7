//! Set generators, single-case reports, sweeps and exhaustive verification.

mod generate;
mod report;
mod sweep;

pub use generate::{generate_set, GenKind, GenSpec};
pub use report::{round9, run_case, theorem_ratio, write_csv, CaseReport, Caps, CSV_HEADER};
pub use sweep::{
    exhaustive_verify, run_sweep, splitmix64, SweepConfig, SweepReport, SweepSummary,
    VerifyOptions, VerifySummary,
};
