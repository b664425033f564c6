//! Scenario configuration, telemetry output and reporting.

pub mod config;
pub mod csv;
pub mod presets;
pub mod report;
pub mod runner;

pub use config::ScenarioConfig;
pub use report::{report_metrics, Report};
pub use runner::{run_batch, validate_all, BatchResult, RunOptions};
