//! Command-line front end for `sdnop-core`: JSON instances, solves,
//! assumption checks, rate sweeps and synthetic instance generation.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod error;
pub mod generate;
pub mod instance;
pub mod output;
pub mod sweep;

pub use commands::{run, Cli};
pub use error::{CliError, Result};
