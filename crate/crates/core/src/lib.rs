//! Simulation and analysis of an on-demand single-photon source: a Λ-type
//! atom in a lossy cavity, driven through a dark-state passage by a Gaussian
//! trigger pulse.
//!
//! * [`model`]: pulse shape, dressed states and closed-form estimates.
//! * [`engine`]: master-equation integration.
//! * [`analysis`]: efficiency, emission time and FWHM of a run.
//! * [`sweep`] and [`fit`]: parameter scans and the empirical efficiency laws.

// `!(x < y)` is used on purpose so that NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod engine;
pub mod error;
pub mod fit;
pub mod model;
pub mod sweep;

pub use analysis::{analyze, EmissionReport};
pub use engine::{simulate, DensityState, Level, Schedule, ScheduleSpec, Trajectory};
pub use error::{Error, Result};
pub use model::{PulseParams, SystemParams};
