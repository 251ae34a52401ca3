//! Batch front-end for `diffsym`: model files, subcommands and JSON reports.
//!
//! Exit codes: 0 affirmative verdict, 1 negative verdict, 2 usage or model error.

pub mod commands;
pub mod model;
pub mod report;
