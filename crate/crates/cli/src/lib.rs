//! Configuration, suites and report output for the `reglab` binary.

pub mod config;
pub mod report;
mod suites;

pub use config::{ConfigError, ExperimentConfig, Format, Suite};
pub use report::{emit, Record, Report, ReportError};
pub use suites::run;
