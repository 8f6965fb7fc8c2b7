//! Command-line runner for hard-core entropy lower bounds: configuration,
//! report formats, the block-family cache and the subcommands.
//!
//! Numerics live in `hcbound-core`; this crate adds IO, parallel multistarts
//! and the reproduction checks behind `hcbound verify`.

pub mod cache;
pub mod checks;
pub mod commands;
pub mod config;
pub mod parallel;
pub mod report;
