//! Coherent-state dynamics of the PT-symmetric quantum harmonic oscillator,
//! computed three ways: closed-form Gaussian propagation, the generalized
//! canonical equations for mean values and covariances, and a discrete
//! round-trip map of a longitudinally pumped optical resonator that emulates
//! the oscillator.
//!
//! Unit system used throughout: lengths are in units of the optical
//! wavelength (`λ = 1`), the reduced Planck constant is replaced by
//! `1/k = λ/2π`, and time is counted in cavity round trips.

// `!(x > bound)` is used on purpose so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod canonical;
pub mod diagnostics;
mod error;
pub mod optics;
pub mod oscillator;

pub use error::{Error, Result};
