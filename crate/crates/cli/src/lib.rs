//! File formats, configuration and the command-line driver for
//! `torsolv-core`.
//!
//! - [`config`]: TOML run configuration and override precedence.
//! - [`expr`]: expression strings for `a(t)`, `b(t)`.
//! - [`field_io`]: CSV and binary field files, tabulated symbols.
//! - [`commands`]: `analyze`, `solve` and `forge`.
//! - [`cli`]: argument parsing and the worker pool.

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod expr;
pub mod field_io;

pub use error::CliError;
