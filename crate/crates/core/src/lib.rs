//! Adaptive multilevel splitting (AMS) for rare-event probabilities in the
//! idealized setting, together with the tooling needed to check its central
//! limit theorem: empirical statistics for Monte Carlo batches and an
//! analytic engine that rebuilds the characteristic function of
//! `log p̂` from its order-`k` linear ODE.
//!
//! Module map:
//!
//! * [`sampling`] distribution models, the `Λ` reduction, conditional draws
//!   and order-statistic laws of the shifted exponential.
//! * [`rng`] seeded, splittable random streams.
//! * [`ams`] the splitting algorithm itself.
//! * [`stats`] normal CDF/quantile, KS tests, Q-Q and histogram data.
//! * [`analysis`] variance, confidence intervals, cost model and the
//!   characteristic-function verifier.
//! * [`verify`] the packaged check suite behind `ams verify`.

pub mod ams;
pub mod analysis;
mod error;
pub mod rng;
pub mod sampling;
pub mod stats;
pub mod verify;

pub use ams::{expected_iterations, run_ams, AmsParams, AmsResult, ReplicaEnsemble};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use rng::RngStream;
pub use sampling::DistributionModel;
pub use stats::{ExperimentReport, NormalizedSample};
