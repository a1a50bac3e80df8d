//! Command implementations and file formats for the `entail` binary.

pub mod commands;
pub mod failure;
pub mod formats;
