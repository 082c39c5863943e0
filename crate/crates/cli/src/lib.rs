//! File format, subcommands and demos behind the `car-extend` binary.

pub mod commands;
pub mod demo;
pub mod statefile;
