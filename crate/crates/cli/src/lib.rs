//! Command-line harness for `owc-capture`: configuration files, CSV output
//! and the analytic-versus-simulation validation report.

pub mod commands;
pub mod config;
pub mod csv;
pub mod error;
pub mod parallel;
