//! Scheduling of observation missions for multiple agile Earth-observation
//! satellites under cloud-coverage uncertainty.
//!
//! The crate is organized around a small set of plain data records
//! ([`model`]), pure attitude/timing geometry ([`geometry`]), scenario
//! sampling and the confidence-quantile objective ([`uncertainty`]), the
//! one-dimensional start-time subproblem ([`start_time`]), the fast
//! insertion/removal operators ([`insertion`]), the construction and
//! annealing heuristics ([`heuristics`]), and seeded benchmark instance
//! generation ([`instance_gen`]).
//!
//! Everything in here is deterministic: all randomness flows through
//! explicitly seeded ChaCha streams, and transcendental math goes through
//! `libm` so results do not depend on the platform libm. The crate is
//! `no_std`-compatible (with `alloc`); file formats and the command-line
//! driver live in the companion `aeos-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![deny(unsafe_code)]
// validation guards are written as `!(x > 0.0)` so that NaN fails them;
// the suggested `x <= 0.0` would wave NaN through
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod geometry;
pub mod heuristics;
pub mod insertion;
pub mod instance_gen;
pub mod model;
mod num;
pub mod start_time;
pub mod uncertainty;
pub mod validate;

pub use model::{
    Instance, InstanceIndex, ModelError, ObservationAssignment, OrbitResource, Schedule, Target,
    VisibleWindow,
};
pub use validate::{validate_schedule, ValidationReport, Violation};
