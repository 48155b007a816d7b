//! Random Boolean networks: generation, synchronous dynamics, attractor
//! sensitivity measures and knock-out avalanches.
//!
//! The modules build on each other bottom-up:
//!
//! - [`model`]: truth tables, packed states, immutable networks.
//! - [`generation`]: families (Bernoulli bias, function sets, majority rule).
//! - [`dynamics`]: updates, attractor search, basin sampling, exact oracle.
//! - [`measures`]: static sensitivity, Derrida DA, SA_i / SA, bias-weighted
//!   influences, the annealed bias map.
//! - [`avalanche`]: knock-outs, size distributions, ratio law.
//! - [`harness`]: config-driven experiments and their CSV/JSON outputs.

pub mod avalanche;
pub mod dynamics;
pub mod error;
pub mod format;
pub mod generation;
pub mod harness;
pub mod measures;
pub mod model;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
pub use model::{BooleanNetwork, NetworkState, TruthTable};
pub use rng::RandomSource;
