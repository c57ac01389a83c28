//! Files, formats and the command-line front end for `qpgap-core`.
//!
//! Every command is a function from a resolved [`config::Device`] and its
//! options to an [`commands::Output`]: a list of named files plus a short
//! summary. The binary only decides where those bytes go.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod data;
pub mod error;
pub mod svg;
pub mod table;

pub use error::{CliError, CliResult};
