//! Experiment front end for `distill-core`: reproduces each figure's data as
//! CSV and runs the invariant suite.

pub mod app;
pub mod config;
pub mod error;
pub mod experiments;
pub mod output;
pub mod validate;

pub use config::{Experiment, ExperimentConfig, Grid};
pub use error::{CliError, CliResult};
pub use output::{Cell, Check, Table};
