//! Subcommand implementations.

pub mod assess;
pub mod benchmark;
pub mod classify;
pub mod fuse;
pub mod simulate;
