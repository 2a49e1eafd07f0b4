//! Numerical toolkit for weighted composition operators acting from the
//! Bloch space of the unit ball or polydisk into weighted spaces of bounded
//! holomorphic functions.
//!
//! The crate provides the Bergman-style metric geometry of both domains,
//! a small holomorphic expression language with exact complex derivatives,
//! deterministic supremum search with boundary diagnostics, Bloch and
//! weighted sup-norm computations, and the operator-level analyses built on
//! top of them: norm enclosures, boundedness and compactness verdicts, and
//! a randomized cross-check oracle.

pub mod blochspace;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod operator;
pub mod oracle;
pub mod report;
pub mod supsearch;
pub mod symbolic;
pub mod weightedspace;

pub use error::{Error, Result};

/// Command line entry point; returns the process exit code.
pub fn run() -> i32 {
    cli::run()
}
