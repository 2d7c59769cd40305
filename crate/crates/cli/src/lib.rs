//! Experiment runner for the `betagamma` channel library.
//!
//! A TOML config lists experiments (`beta_vs_distance`,
//! `limiting_snr_vs_distance`, `ser_vs_rxsnr`); [`runner::run`] evaluates
//! them and writes one CSV each plus a JSON manifest.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod runner;

pub use config::{Config, ConfigError};
pub use runner::{run, RunError, RunSummary};

/// Process exit codes.
pub mod exit {
    pub const SUCCESS: i32 = 0;
    /// Unreadable, malformed or physically invalid config, or bad arguments.
    pub const CONFIG: i32 = 1;
    /// Numerical failure or unwritable output during a run.
    pub const RUN: i32 = 2;
}
