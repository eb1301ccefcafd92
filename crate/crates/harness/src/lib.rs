//! Experiment pipeline over `jchaos-core`: configuration, persisted runs,
//! analysis tables, scaling fits and verification.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod config;
pub mod error;
pub mod fits;
pub mod pipeline;
pub mod report;
pub mod store;
pub mod verify;

pub use config::ExperimentConfig;
pub use error::{HResult, HarnessError};
