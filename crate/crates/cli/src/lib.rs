//! Configuration, verification suites and report emission for the `asymptopia` binary.

pub mod config;
pub mod report;
pub mod suite;
