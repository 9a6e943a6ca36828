//! Numerical laboratory for a family of one-dimensional quasi-periodic
//! Schrödinger operators with potential
//! `v(theta) = 2 lambda cos(2 pi theta) / (1 - alpha cos(2 pi theta))`.
//!
//! The crate cross-validates three routes to the same physics:
//!
//! - closed-form Lyapunov exponents, the mobility edge
//!   `alpha E = 2 sgn(lambda)(1 - |lambda|)`, and parameter-regime
//!   classification ([`analytic`]);
//! - transfer-matrix cocycles: renormalized Lyapunov estimates, complexified
//!   phase and acceleration, determinant recursions and finite-interval Green
//!   functions ([`cocycle`]);
//! - finite truncations: Sturm-bisection spectra, eigenvectors, IPR and
//!   decay-rate localization diagnostics ([`spectrum`], [`localization`]).
//!
//! [`sweep`] drives parameter sweeps (phase diagrams, LE scans, acceleration
//! scans) with deterministic, schedule-independent output.

pub mod analytic;
pub mod cocycle;
pub mod error;
pub mod localization;
pub mod potentials;
pub mod spectrum;
pub mod sweep;

pub use error::{Error, Result};
