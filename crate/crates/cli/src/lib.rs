//! Command-line driver for the `theta-bundle` verification suites.
//!
//! Each suite turns one group of identities into named checks with tolerances and
//! emits a JSON (or CSV) report. [`app::run`] is the whole program; `main` only
//! forwards the process arguments.

use std::fmt;

pub mod app;
pub mod config;
pub mod report;
pub mod suites;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Bad flags, config files or parameters. Exit code 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}
