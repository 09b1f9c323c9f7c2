//! Command-line harness and play-test server.

pub mod commands;
pub mod server;
