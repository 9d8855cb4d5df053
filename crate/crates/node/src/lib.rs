//! Operator surface for the stamp-duty ledger: a single-writer node
//! service with an HTTP JSON API, and the `ssd` command-line client.

pub mod api;
pub mod cli;
pub mod client;
pub mod config;
pub mod keyfile;
pub mod query;
pub mod service;

pub use config::NodeConfig;
pub use service::{spawn, RunningNode};
