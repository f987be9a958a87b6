//! Numerical verification toolkit for Dirichlet heat kernel and Green function
//! estimates of `X^a = X^0 + aY`, a Brownian motion with generator `Δ` plus an
//! independent rotationally symmetric α-stable process scaled by `a`, killed on
//! leaving a half-space or a half-space-like domain.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: parameters, domains with exact distance functions, regime thresholds.
//! * [`special`]: Gamma and Beta functions.
//! * [`envelopes`]: closed-form two-sided envelopes and Green forms.
//! * [`quadrature`]: adaptive Gauss–Kronrod integration and the time-integral checks.
//! * [`identities`]: exact scaling identities, the φ-sandwich, the fractional power constant.
//! * [`montecarlo`]: killed path simulation and estimators.

pub mod envelopes;
pub mod error;
pub mod identities;
pub mod model;
pub mod montecarlo;
pub mod quadrature;
pub mod rng;
pub mod special;

pub use error::{Error, Result};
pub use model::{Domain, ModelParams, Region};
