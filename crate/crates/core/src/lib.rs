//! Core library for Ising spin-glass benchmarking on Chimera hardware graphs:
//! graph construction, instance generation with control noise, the QAC
//! repetition encoding, exact and heuristic solvers, time-to-solution
//! statistics and data-collapse fitting.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chimera;
pub mod collapse;
pub mod error;
pub mod instance;
pub mod qac;
pub mod rng;
mod simplex;
pub mod solvers;
pub mod stats;

pub use error::{Error, Result};
pub use rng::Seed;
