//! Aggregated single-frequency grid dynamics with droop-controlled fast
//! frequency regulation resources (FFRs).
//!
//! The crate has four parts:
//!
//! * [`model`]: the aggregated grid (generators, FFRs, total inertia) and the
//!   power-imbalance event.
//! * [`control`]: FFR power-regulation laws (constant droop, time-variant
//!   droop scheduled to emulate a fixed inertia increment), a slow generator
//!   governor, and allocation of the total droop among FFRs.
//! * [`sim`]: fixed-step integration of the swing equation under a controller,
//!   producing a uniformly sampled [`Trace`](sim::Trace).
//! * [`analytics`]: closed-form trajectories and the equivalent-inertia
//!   estimator that recovers the inertia increment a power regulation is
//!   worth.
//!
//! All powers are per-unit on the system base; frequency is the per-unit
//! deviation from nominal. The crate is `no_std` and only needs `alloc`.

#![cfg_attr(not(test), no_std)]
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytics;
pub mod control;
mod error;
pub mod integrate;
pub mod model;
pub mod sim;

pub use analytics::InertiaEstimate;
pub use control::{Allocation, Controller, DroopSchedule, GovernorSpec};
pub use error::{Error, Result};
pub use integrate::Integrator;
pub use model::{FfrSpec, GeneratorSpec, ImbalanceEvent, SystemModel};
pub use sim::{simulate, SimConfig, Trace};
