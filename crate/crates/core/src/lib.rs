//! Nonparametric two-sample tests for current status data.
//!
//! Current status observations record, for each subject, an inspection time
//! `t` and the indicator `delta = 1{x <= t}` of whether the hidden event time
//! `x` has already occurred. This crate tests whether two such samples share
//! the same hidden-event distribution, without parametric assumptions and
//! while allowing the two samples to have different inspection-time densities.
//!
//! The toolkit:
//!
//! * [`isotonic`] — greatest convex minorant and pool-adjacent-violators
//!   solvers, the optimization kernel behind every estimator here.
//! * [`kernel`] — triweight kernel smoothing with exact two-moment boundary
//!   correction, kernel moment constants, and grid quadrature.
//! * [`estimators`] — the step-function MLE from the discrete cusum diagram
//!   and the smoothed estimator (MSLE) from its continuous analogue.
//! * [`statistics`] — the smoothed likelihood-ratio statistic `V_N`, the raw
//!   LR statistic, the moment-functional statistics `U_N` and `W_N`, pivot
//!   normalization, and second-order diagnostics.
//! * [`bootstrap`] — conditional Bernoulli bootstrap of the indicators for
//!   critical values of the LR-type statistics.
//! * [`simulation`] — Weibull scenario generation and the replication engine
//!   that produces level/power tables.
//! * [`rng`] — counter-based random streams, reproducible independently of
//!   execution order.
//!
//! The crate is `no_std` (with `alloc`); all floating-point math goes through
//! `libm` so results are bit-identical across platforms.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod bootstrap;
pub mod estimators;
pub mod grid;
pub mod isotonic;
pub mod kernel;
pub mod rng;
pub mod simulation;
pub mod statistics;

mod error;

pub use error::{Error, Result};
