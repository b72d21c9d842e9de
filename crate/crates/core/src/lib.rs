//! Models and estimators for hybridizing a cold-atom accelerometer (QA) with a
//! classical accelerometer (CA).
//!
//! The crate is `no_std` and only needs `alloc`. Everything here is pure
//! computation: fringe model, synthetic sensor streams, the triangular
//! interferometer kernels, the two hybridization estimators and the stability
//! analysis used to compare them. File formats, configuration and the CLI live
//! in the `qa-hybrid-harness` crate.
//!
//! # Pipeline
//!
//! ```text
//! truth stream ──► QA composition ──► fringe model ──► P_i ─┐
//!      │                                                     ├─► estimator ──► b̂, η̂, θ̂
//!      └──► CA model (filter, affine, noise) ──► kernels ────┘
//! ```
//!
//! [`pipeline::simulate_cycle`] produces one interferometer cycle at a time from
//! counter-based noise, so cycles can be generated independently and in any
//! order while staying bit-reproducible for a given seed.

#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

mod error;
mod math;

pub mod algo_one;
pub mod algo_two;
pub mod analysis;
pub mod estimator;
pub mod filter;
pub mod kernels;
pub mod limits;
pub mod pipeline;
pub mod rng;
pub mod signal_model;
pub mod synth;

pub use error::{Error, Result};
pub use estimator::{Coefficient, CycleInputs, EstimatorState};
pub use kernels::{CycleAverages, KernelSet};
pub use signal_model::{InterferometerConfig, RotationState};
pub use synth::{SensorStream, TruthParams};
