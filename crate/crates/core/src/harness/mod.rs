//! Config-driven Monte Carlo sweeps with theory overlays and CSV output.

mod config;
mod csv;
mod moments;
mod selftest;
mod sweep;

pub use self::csv::{
    csv_string, emit_csv, format_real, parse_csv, read_csv, records_csv_string, CsvRecord, COLUMNS,
};
pub use config::{ExperimentConfig, Grid, GridPoint, ModelKind, ModelSpec, Scheme};
pub use moments::Moments;
pub use selftest::{selftest, SelfCheck};
pub use sweep::{
    env_threads, run_point, run_sweep, run_sweep_threads, theory_at, PointStats, SweepRow,
    TheoryValues,
};
