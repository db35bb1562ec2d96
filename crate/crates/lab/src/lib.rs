//! Experiment scenarios, flop bench, acceptance suite and CLI plumbing for
//! the `shiftsign` crate.

pub mod acceptance;
pub mod config;
pub mod csv;
pub mod error;
pub mod scenarios;

pub use error::{LabError, Result};
