//! IO, configuration and the command-line front end for `semicap-core`.

pub mod cli;
pub mod config;
pub mod output;
pub mod parallel;
