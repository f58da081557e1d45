//! File formats, reports and subcommand implementations for the `manycopy`
//! command-line tool.

pub mod commands;
pub mod files;
pub mod report;
