//! Command-line front end: configuration files, problem construction and
//! CSV reports.

pub mod build;
pub mod config;
pub mod expr;
pub mod run;
