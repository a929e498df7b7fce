//! File-backed workspace, command line and HTTP service for `scs-core`.

pub mod api;
pub mod cli;
pub mod fsio;
pub mod workspace;
