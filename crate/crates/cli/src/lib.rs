//! Experiment harness behind the `bench` binary: spec-file parsing, the
//! Monte Carlo sweep runner and CSV/gnuplot reporting.

pub mod experiment;
pub mod report;
pub mod runner;

pub use experiment::{parse_spec, parse_spec_str, ExperimentSpec, Metric, NamedConfig, SpecError};
pub use report::{csv_string, write_csv, write_gnuplot};
pub use runner::{derive_seed, monotonicity_warnings, run_experiment, ResultRow, RunnerError};
