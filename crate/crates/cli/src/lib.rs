//! Experiment driver for `fbvol-core`: run configuration, the ε sweep,
//! the verification suite and the file formats used by the `fbvol` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod io;
pub mod sweep;
pub mod verify;

pub use config::{parse_config, parse_str, Check, ConfigError, Geometry, Problem, RunConfig};
pub use sweep::{run_epsilon_sweep, solve_all, SweepReport, SweepRow, SweepRun};
pub use verify::{run_verification_suite, CheckRow, Status, VerifyReport};
