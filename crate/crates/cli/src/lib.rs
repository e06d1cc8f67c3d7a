//! Command-line harness: configuration loading, command dispatch and the
//! CSV/JSON artifacts of each command.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod run;

pub use config::{load_config, parse_config, Command, Overrides, RunConfig};
pub use run::{execute, run, Outcome, RunError};
