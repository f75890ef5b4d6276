//! Configuration, file formats and commands around [`tpsim_core`].
//!
//! The binary exposes three commands: `simulate` writes event logs,
//! snapshots and diagnostics; `validate` writes Q-Q data and Kolmogorov–Smirnov
//! verdicts for the time-rescaled intervals; `bench` writes a timing table.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod config;
pub mod error;
pub mod io;
pub mod model;
pub mod run;

pub use config::{BenchConfig, RunConfig};
pub use error::CliError;
