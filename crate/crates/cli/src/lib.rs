//! Library surface of the `idslab` runner, exposed so integration tests can
//! drive configs, manifests and subcommands in-process.

pub mod config;
pub mod manifest;
pub mod runner;
