//! File formats and subcommands for the `zigzag` binary.

pub mod commands;
pub mod io;
