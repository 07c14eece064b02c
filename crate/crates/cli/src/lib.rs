//! Pipeline around the `rbdrift` library: configuration files, the
//! simulate → fit → compare → report commands and their CSV/JSON outputs.

pub mod commands;
pub mod config;
pub mod error;
pub mod tables;

pub use commands::{
    cmd_compare, cmd_fit, cmd_interleave, cmd_ramsey, cmd_report, cmd_simulate, FitRecord,
    ReportBundle,
};
pub use config::RunConfig;
pub use error::{CliError, CliResult};
