//! Scenario loading, run orchestration and output for the `retarded` binary.

pub mod commands;
pub mod config;
pub mod output;
