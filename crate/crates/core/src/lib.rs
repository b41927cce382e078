//! Uplink power control for cell-free massive MIMO networks.
//!
//! The crate covers the whole offline/online pipeline:
//!
//! - [`system`]: network realizations, large-scale fading, pilots, LMMSE
//!   channel-estimate statistics and the closed-form use-and-then-forget rate,
//!   plus a Monte-Carlo simulator of the received soft estimates that checks it.
//! - [`solvers`]: the uniform baseline, max-min fairness by bisection over an
//!   equal-SINR feasibility problem, and sum-rate maximization by successive
//!   lower-bound (difference-of-concave) maximization.
//! - [`neural`]: small dense networks trained with Nadam to imitate the solvers.
//! - [`datagen`]: seeded datasets of (input, optimal power) pairs with manifests.
//! - [`evaluation`]: per-user rate CDFs and train/validation MSE tables.
//! - [`pipeline`]: the gen / solve / train / eval stages behind the `cellfree` binary.
//!
//! All powers are in milliwatts and all arithmetic is `f64`.

pub mod config;
pub mod datagen;
pub mod error;
pub mod evaluation;
pub mod neural;
pub mod pipeline;
pub mod rng;
pub mod solvers;
pub mod system;

pub use config::{Objective, Scenario, SystemConfig};
pub use error::{Error, Result};
pub use solvers::{PowerVector, SolverReport};
pub use system::{NetworkRealization, SinrCoefficients};
