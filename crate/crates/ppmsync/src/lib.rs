//! Experiment harness for the pulse-position schemes of [`ppmsync_core`].
//!
//! Configurations are JSON ([`config`]); [`harness`] runs Monte Carlo trials
//! in parallel over independent random streams, summarizes them in a
//! [`harness::TrialReport`], runs parameter sweeps to CSV, and checks the
//! expected-cost equivalence between an IDC followed by a DMC and the DMC
//! alone.

pub mod config;
pub mod harness;
pub mod stats;

pub use ppmsync_core as core;

#[derive(Debug, thiserror::Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] ppmsync_core::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = HarnessError> = std::result::Result<T, E>;
