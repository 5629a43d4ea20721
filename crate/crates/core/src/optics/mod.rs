//! The discrete optical system: ray matrices, spectral Collins propagation,
//! the pump gain sheet and the round-trip map of the injected resonator.

mod abcd;
mod cavity;
mod collins;
mod field;
mod gain;

pub use abcd::{round_trip_matrix_fig1b, stability_angle, AbcdMatrix};
pub use cavity::{
    derive_oscillator_params, excitation_envelope, round_trip, Cavity, CavityConfig, Excitation,
    Geometry, GridSpec,
};
pub use collins::{collins_propagate, CollinsPropagator};
pub use field::TransverseField;
pub use gain::GainProfile;
