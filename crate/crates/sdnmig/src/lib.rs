//! File formats, experiment commands and benchmarks around `sdnmig-core`.
//!
//! * [`sndlib`]: SNDlib native network files.
//! * [`lp`]: LP text export of the migration program.
//! * [`export`]: JSON and CSV outputs.
//! * [`config`]: experiment configuration.
//! * [`commands`]: the `sdnmig` subcommands as functions.

pub use sdnmig_core as core;

pub mod commands;
pub mod config;
pub mod export;
pub mod lp;
pub mod sndlib;
