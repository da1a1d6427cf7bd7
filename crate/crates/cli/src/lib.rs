//! Command-line front end: config loading, validation and subcommands.

pub mod commands;
pub mod config;
