//! Pulse-level simulation of the adiabatic quantum-perceptron gate.
//!
//! The crate is organised bottom-up:
//!
//! * [`numerics`]: dense complex linear algebra and the RK4 integrator.
//! * [`device`]: two transmons plus a tunable coupler, and the ZZ coupling.
//! * [`pulse`]: chirped and hyperbolic-secant drive schedules.
//! * [`dynamics`]: rotating-frame evolution of the output qubit, the
//!   block-diagonal perceptron unitary and Lindblad evolution.
//! * [`analysis`]: activation curves, the analytic transfer formula and its
//!   fit, process-level metrics and negativity.
//! * [`circuits`]: the equivalent CNOT circuit and its cost scaling.
//! * [`config`]: the TOML run configuration shared with the command line.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod circuits;
pub mod config;
pub mod device;
pub mod dynamics;
pub mod error;
pub mod numerics;
pub mod pulse;
pub mod units;

pub use error::{Error, Result};
