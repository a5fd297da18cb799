//! Simulation and verification toolkit for the Cramér random model of primes.
//!
//! The model draws independent `xi_j ~ Bernoulli(1/ln j)` for `j >= 3` and
//! studies the walk `S_n = xi_3 + ... + xi_n`. This crate simulates the walk,
//! its jump instants and a few companion processes, evaluates the closed-form
//! laws and estimates attached to them, and checks both against exact
//! dynamic-programming oracles.
//!
//! ```
//! use cramer_model::model::{moments, ModelSpec};
//!
//! let m = moments(&ModelSpec::fair_coin(), 10).unwrap();
//! assert_eq!((m.mean, m.variance), (5.0, 2.5));
//! ```

pub mod analytic;
pub mod calibration;
pub mod error;
pub mod experiments;
pub mod model;
pub mod numeric;
pub mod primes;
pub mod rng;
pub mod stats;
pub mod stochastic;
pub mod sturm_liouville;

pub use error::{Error, Result};
pub use model::{ModelKind, ModelSpec, Moments};

#[doc(hidden)]
pub use serde_json as __serde_json;
