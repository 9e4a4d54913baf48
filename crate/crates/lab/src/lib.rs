//! Experiment runner for the `bregman-core` flows and discrete methods:
//! JSON configs, CSV traces, `summary.json` reports and the acceptance suite.

pub mod acceptance;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod report;

pub use acceptance::{acceptance_suite, SuiteOptions};
pub use config::{ExperimentConfig, ExperimentKind, Scale};
pub use error::LabError;
pub use experiments::run_experiment;
pub use report::{CheckResult, ReportSummary, Status};
