//! Library surface of the `gumbel` CLI: argument definitions, config
//! handling, subcommand execution and the verification suites, exposed so
//! integration tests can drive everything in-process.

pub mod cli;
pub mod config;
pub mod run;
pub mod verify;
