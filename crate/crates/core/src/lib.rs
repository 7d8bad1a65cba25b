//! Exact propagators, Ermakov-Pinney invariants and Ince-equation
//! periodicity analysis for quadratic Hamiltonians with time-dependent
//! coefficients, together with the oracles used to check them.

// NaN-rejecting guards read as `!(x > 0.0)`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod characteristic;
pub mod ermakov;
pub mod error;
pub mod field;
pub mod hermite;
pub mod ince;
pub mod models;
pub mod ode;
pub mod operators;
pub mod oracles;
pub mod propagator;
pub mod spline;
pub mod validation;

pub use error::{Error, Result};
