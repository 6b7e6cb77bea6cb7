//! Numerical engine for two-time quadrature correlators of the squeezed
//! field leaking from a parametrically driven resonator.
//!
//! The engine propagates the linearized intracavity dynamics in the
//! `(alpha, alpha*)` basis with a 2x2 complex Green's function, seeds the
//! output-field correlators `K_ff` and `K_ff*` from the intracavity second
//! moments, and assembles the measured quadrature correlator for arbitrary
//! (time-dependent) quadrature angles. Singular equal-time contributions are
//! carried symbolically as delta weights, never discretized.
//!
//! Cross-validation paths are built in:
//!
//! - [`analytic`] holds closed-form steady-state and phase-jump solutions,
//!   implemented independently of the ODE engine;
//! - [`montecarlo`] is a stochastic-trajectory oracle for the same
//!   correlators, driven by reproducible per-trajectory noise streams.
//!
//! The crate is `no_std`-compatible (with `alloc`); file formats, the CLI,
//! and parallel ensemble execution live in the companion `sqz-cli` crate.

#![cfg_attr(not(feature = "std"), no_std)]
// Guards written as `!(x > 0.0)` intentionally reject NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod analytic;
pub mod correlators;
pub mod decomposition;
pub mod error;
pub mod mat2;
pub mod moments;
pub mod montecarlo;
pub mod nonlinear;
mod ode;
pub mod propagator;
pub mod schedule;
pub mod signal;

pub use error::{Error, Result};
pub use num_complex::Complex64;
