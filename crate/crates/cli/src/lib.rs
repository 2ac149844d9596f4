//! File codecs and report writers behind the `tmsc` command-line tool.

pub mod error;
pub mod io;
pub mod report;

pub use error::{CliError, Result};
