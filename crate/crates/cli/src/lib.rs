//! Command-line plumbing for greycast: CSV input, model files, hybrid runs,
//! rolling-origin backtests and report output.

pub mod backtest;
pub mod cli;
pub mod config;
pub mod data;
mod error;
pub mod hybrid;
pub mod models;
pub mod report;
pub mod synth;

pub use cli::{run, Cli};
pub use error::{CliError, Result};
