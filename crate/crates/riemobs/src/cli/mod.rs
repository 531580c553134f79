//! Command-line front end: job configuration, command bodies and
//! deterministic artifact writers. The binary in `main.rs` is a thin
//! argument-parsing shell over these functions.

pub mod artifacts;
pub mod commands;
pub mod config;

pub use artifacts::{
    csv_float, read_run_distances, write_dist_dat, write_geodesic_csv,
    write_json, write_run_csv, RunSummary,
};
pub use commands::{
    exit_code_for_error, run_check, run_geodesic, run_report, run_simulate,
};
pub use config::{GainSpec, GeodesicSpec, JobConfig, LinearSpec, Overrides,
    SamplingSpec, SimulationSpec};
