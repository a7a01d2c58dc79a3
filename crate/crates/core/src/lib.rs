//! Distributed multiple testing with Benjamini–Hochberg FDR control when a
//! fraction of the reporting nodes is Byzantine.
//!
//! The crate is organised the way a trial flows through the simulator:
//!
//! - [`model`]: hypotheses, node partitioning, test statistics and p-values.
//! - [`report`]: the per-node p-value report that attacks rewrite.
//! - [`bh`]: the step-up procedure and realized FDP / power.
//! - [`attack`]: oracle, BH-classifier, enhanced BH-classifier and shuffling attacks.
//! - [`defense`]: central-agent counter-attacks on zeroed p-values.
//! - [`bounds`]: Monte Carlo estimators of the FDR expressions under attack.
//! - [`sim`]: deterministic, parallel trial runner and parameter sweeps.

pub mod attack;
pub mod bh;
pub mod bounds;
pub mod defense;
mod error;
pub mod model;
pub mod normal;
pub mod report;
pub mod rng;
pub mod sim;

pub use error::{Error, Result};
