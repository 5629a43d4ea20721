use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Mehler kernel is singular at Ωt = {phase} (|sin Ωt| below {tolerance:e})")]
    SingularTime { phase: f64, tolerance: f64 },

    #[error("packet is not normalizable (Re a = {0})")]
    NotNormalizable(f64),

    #[error("unstable resonator: |A| = {0} must be below 1")]
    UnstableCavity(f64),

    #[error("ABCD element B vanishes (imaging condition); the Fresnel kernel is undefined")]
    ImagingCondition,

    #[error("ABCD element C vanishes; the oscillator displacement is undefined")]
    ZeroFocusing,

    #[error("field and grid mismatch: {0}")]
    GridMismatch(String),

    #[error("integrator failure at t = {t}: {reason}")]
    IntegratorFailure { t: f64, reason: String },

    #[error("field reached the window edge at round trip {round_trip} (edge/peak = {ratio:e})")]
    Aliasing { round_trip: u64, ratio: f64 },

    #[error("power iteration did not converge after {iterations} iterations (last change {change:e})")]
    NoConvergence { iterations: usize, change: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("non-positive power {power} at sample {index}")]
    NonPositivePower { index: usize, power: f64 },

    #[error("modes are degenerate: |<mode, adjoint>| = {0:e}")]
    DegenerateOverlap(f64),
}

pub(crate) fn check(cond: bool, name: &'static str, reason: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: reason() })
    }
}
