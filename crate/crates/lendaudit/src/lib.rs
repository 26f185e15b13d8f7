//! File formats, completion clients, the corpus runner and report output
//! around `lendaudit-core`.

pub mod builtin;
pub mod completion;
pub mod config;
pub mod corpus;
pub mod formats;
pub mod mapping_run;
pub mod report;

pub use lendaudit_core as core;
