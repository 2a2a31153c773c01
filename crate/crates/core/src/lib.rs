//! Data-integrity scoring for an IoT hub whose device inputs are exposed to
//! manipulation attacks.
//!
//! The pipeline for one time slot:
//!
//! 1. [`adversary`] decides which inputs are compromised,
//! 2. [`monitor`] classifies every input as not compromised / compromised /
//!    undecided,
//! 3. [`bayes`] turns the verdict counts into posterior beliefs,
//! 4. [`integrity`] scores the slot with prospect theory (and optionally an
//!    expected-utility baseline),
//! 5. [`trust`] maps the utility to `[-1, 1]` and updates the cumulative,
//!    exponential and asymmetric moving averages.
//!
//! [`harness`] drives replications and sweeps, [`figures`] bundles the
//! standard experiments, and [`output`] persists CSVs and manifests.

pub mod adversary;
pub mod bayes;
pub mod config;
pub mod error;
pub mod exec;
pub mod figures;
pub mod harness;
pub mod integrity;
pub mod monitor;
pub mod output;
pub mod trust;

pub use config::{ScenarioConfig, Theory};
pub use error::{Error, Result};
pub use exec::Execution;
pub use harness::{run_scenario, sweep, SlotRecord, SweepAxis, SweepRow};
