//! Configuration, result export and the subcommands of the `wirephase` tool.

pub mod config;
pub mod export;
pub mod scenarios;
