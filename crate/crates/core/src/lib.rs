//! Numerical laboratory for the linear fractional self-attracting diffusion
//!
//! ```text
//! X_t = B^H_t - a int_0^t int_0^s (X_s - X_u) du ds + nu t,   1/2 < H < 1,
//! ```
//!
//! driven by fractional Brownian motion. The crate provides
//!
//! - exact-in-distribution fBm path generation ([`fbm`]),
//! - numerically stable evaluation of the solution kernel `h(t,s)` and the
//!   weighted-local-time weight `w(s)` ([`kernel`]),
//! - product-integration quadrature for the weakly singular double integrals
//!   behind every second-order statistic, together with convergence-theorem
//!   bound checks ([`gausscov`]),
//! - three cross-validating path simulators ([`simulate`]),
//! - occupation-time estimators for the local time and weighted local time
//!   with analytic Gaussian oracles and the expected Tanaka identity
//!   ([`localtime`]),
//! - the planar self-intersection local time: Monte Carlo estimator,
//!   analytic mean/variance, and the small-`epsilon` variance study
//!   ([`silt`]),
//! - the acceptance suite run by the CLI and the test target
//!   ([`acceptance`]).

pub mod acceptance;
pub mod csvio;
pub mod error;
pub mod fbm;
pub mod gausscov;
pub mod kernel;
pub mod localtime;
pub mod normal;
pub mod params;
pub mod quad1d;
pub mod rng;
pub mod sigtable;
pub mod silt;
pub mod simulate;
pub mod stats;

pub use error::{Error, Result};
pub use params::{HurstIndex, ModelParams, TimeGrid};
