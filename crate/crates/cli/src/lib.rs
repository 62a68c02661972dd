//! Library side of the `lyapunov` binary.

pub mod commands;
pub mod config;
pub mod report;

pub use commands::{compare, comparison_passes, ratio, simulate, theory, RatioConfig, Z_GATE};
pub use config::{OutputFormat, Overrides, RunConfig, Threads};
pub use report::{ComparisonRow, Meta, Report, Row};
