//! Command-line front end: config-driven runs, data ingestion, result
//! files and the acceptance suites.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
