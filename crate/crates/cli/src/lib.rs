//! Command implementations behind the `osdd` binary.

pub mod commands;
pub mod error;
pub mod reproduce;

pub use error::CliError;
