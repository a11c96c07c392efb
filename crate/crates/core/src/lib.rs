//! Photon-number statistics from multiplexed click detectors.
//!
//! The crate turns click-counting data of an `N`-bin detector into
//! (pseudo-)photon-number distributions with an analytic Stirling-number
//! inverse, removes detection losses, calibrates the detector response from
//! coherent-state sweeps, and provides the forward model and a seeded shot
//! sampler to generate test data.

// `!(x >= 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod aggregate;
pub mod bootstrap;
pub mod combinatorics;
pub mod dataio;
mod error;
pub mod float_repr;
pub mod forward_model;
pub mod reconstruction;
pub mod rng;
pub mod statistics;
pub mod sweep;
pub mod tomography;
mod warning;

pub use error::{Error, Result};
pub use nalgebra;
pub use warning::Warning;
