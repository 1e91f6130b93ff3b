//! Verification harness, file formats and command line for `mcx-core`.

pub mod cli;
pub mod format;
pub mod spec_json;
pub mod verify;
