//! Host-side tooling for the MFTP simulator: experiment configs, the parallel
//! sweep runner, bootstrap intervals, CSV/JSON output and spin snapshots.
//! The simulation itself lives in [`mftp_core`].

pub mod config;
pub mod error;
pub mod output;
pub mod snapshot;
pub mod stats;
pub mod sweep;

pub use error::{Error, Result};
pub use mftp_core;
