//! Injected resonator with a thin gain sheet at the flat mirror:
//!
//! ```text
//! ψ_{n+1}(x) = e^{-l} e^{g(x)/2} K̂ e^{g(x)/2} ψ_n(x) + √T A_n F(x) e^{inΔ}
//! ```
//!
//! with the full Gaussian pump profile `g(x)` and `F(x) = exp[-(x - x_e)²/w_e²]`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{round_trip_matrix_fig1b, stability_angle, AbcdMatrix, CollinsPropagator, GainProfile, TransverseField};
use crate::error::{check, Error, Result};
use crate::oscillator::{OscillatorParams, WAVELENGTH};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    /// Focal length of the cavity lens.
    pub f: f64,
    /// Fourier lens; lengthens the transit time only, never enters the dynamics.
    pub f1: f64,
    /// Flat mirror to lens spacing.
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Excitation {
    pub waist: f64,
    /// Transverse offset of the injected beam.
    pub center: f64,
    /// Envelope peak, in round trips.
    pub pulse_center: f64,
    /// Envelope 1/e half-width, in round trips.
    pub pulse_duration: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    pub width: f64,
}

/// All lengths in units of the wavelength.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CavityConfig {
    pub geometry: Geometry,
    /// Round-trip logarithmic loss `l`.
    pub round_trip_loss: f64,
    pub mirror_transmittance: f64,
    pub gain: GainProfile,
    /// Carrier detuning `Δ`, radians per round trip.
    pub detuning: f64,
    pub excitation: Excitation,
    pub grid: GridSpec,
}

impl CavityConfig {
    /// The below-threshold resonator with off-axis pumping and short-pulse
    /// Gaussian excitation used as the reference experiment.
    pub fn fig2() -> Self {
        let f = 1e5;
        let pump_waist = 483.0;
        Self {
            geometry: Geometry { f, f1: f, length: 0.95 * f },
            round_trip_loss: 0.18,
            mirror_transmittance: 0.01,
            gain: GainProfile { peak: 0.2, pump_waist, offset: pump_waist / 2.0 },
            detuning: 0.0,
            excitation: Excitation {
                waist: 40.0,
                center: 0.0,
                pulse_center: 5.0,
                pulse_duration: 1.0,
                amplitude: 1.0,
            },
            grid: GridSpec { points: 4096, width: 2048.0 },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let g = &self.geometry;
        check(g.f.is_finite() && g.f > 0.0, "geometry.f", || format!("must be positive, got {}", g.f))?;
        check(g.length.is_finite() && g.length > 0.0, "geometry.length", || {
            format!("must be positive, got {}", g.length)
        })?;
        check(g.length < g.f, "geometry.length", || {
            format!("resonator is stable only for L < f (L = {}, f = {})", g.length, g.f)
        })?;
        check(self.round_trip_loss.is_finite(), "round_trip_loss", || "must be finite".into())?;
        let t = self.mirror_transmittance;
        check((0.0..=1.0).contains(&t), "mirror_transmittance", || format!("must lie in [0, 1], got {t}"))?;
        let gain = &self.gain;
        check(gain.peak.is_finite() && gain.peak >= 0.0, "gain.peak", || {
            format!("must be non-negative, got {}", gain.peak)
        })?;
        check(gain.pump_waist.is_finite() && gain.pump_waist > 0.0, "gain.pump_waist", || {
            format!("must be positive, got {}", gain.pump_waist)
        })?;
        check(gain.offset.is_finite(), "gain.offset", || "must be finite".into())?;
        check(self.detuning.is_finite(), "detuning", || "must be finite".into())?;
        let e = &self.excitation;
        check(e.waist.is_finite() && e.waist > 0.0, "excitation.waist", || {
            format!("must be positive, got {}", e.waist)
        })?;
        check(e.pulse_duration.is_finite() && e.pulse_duration > 0.0, "excitation.pulse_duration", || {
            format!("must be positive, got {}", e.pulse_duration)
        })?;
        check(e.center.is_finite() && e.pulse_center.is_finite() && e.amplitude.is_finite(), "excitation", || {
            "center, pulse_center and amplitude must be finite".into()
        })?;
        let n = self.grid.points;
        check(n >= 16 && n.is_power_of_two(), "grid.points", || {
            format!("must be a power of two of at least 16, got {n}")
        })?;
        check(self.grid.width.is_finite() && self.grid.width > 0.0, "grid.width", || {
            format!("must be positive, got {}", self.grid.width)
        })?;
        Ok(())
    }

    pub fn round_trip_matrix(&self) -> Result<AbcdMatrix> {
        round_trip_matrix_fig1b(self.geometry.f, self.geometry.length)
    }

    /// Oscillator emulated by the cavity with the pump linearized on axis.
    pub fn oscillator_params(&self) -> Result<OscillatorParams> {
        let (_, alpha) = self.gain.linearize();
        derive_oscillator_params(&self.round_trip_matrix()?, alpha, WAVELENGTH)
    }

    /// Gaussian exponent `σ = 1/w_e²` of the injected beam.
    pub fn excitation_sigma(&self) -> f64 {
        1.0 / (self.excitation.waist * self.excitation.waist)
    }

    pub fn excitation_profile(&self, x: f64) -> f64 {
        let u = (x - self.excitation.center) / self.excitation.waist;
        (-u * u).exp()
    }

    /// Round trip whose injection carries the envelope peak.
    pub fn pulse_peak_round_trip(&self) -> i64 {
        self.excitation.pulse_center.round() as i64
    }

    /// First round trip at which the envelope has decayed below `e^{-9}`
    /// and the injected packets have entered the field.
    pub fn post_excitation_start(&self) -> u64 {
        let e = &self.excitation;
        ((e.pulse_center + 3.0 * e.pulse_duration).ceil() + 1.0).max(0.0) as u64
    }
}

/// `A_n = exp[-(n - t_p)²/τ_p²]` with times in round trips.
pub fn excitation_envelope(n: f64, config: &CavityConfig) -> f64 {
    let u = (n - config.excitation.pulse_center) / config.excitation.pulse_duration;
    (-u * u).exp()
}

/// Oscillator parameters of the operator `e^{αx/2} K̂ e^{αx/2} = exp(-ikĤ)`:
/// `Ω = θ`, `m = -sin θ/(θB)`, `δ = -α(1 + A)/(2kC)`, `ħ = 1/k`.
///
/// A constant real shift of `Ĥ` is dropped; it only moves the resonance
/// frequencies.
pub fn derive_oscillator_params(m: &AbcdMatrix, alpha: f64, wavelength: f64) -> Result<OscillatorParams> {
    let theta = stability_angle(m)?;
    if m.b == 0.0 {
        return Err(Error::ImagingCondition);
    }
    if m.c == 0.0 {
        return Err(Error::ZeroFocusing);
    }
    let k = TAU / wavelength;
    let mass = -theta.sin() / (theta * m.b);
    let delta = -alpha * (1.0 + m.a) / (2.0 * k * m.c);
    OscillatorParams::new(mass, theta, delta, 1.0 / k)
}

/// The round-trip operator bound to one configuration and grid.
#[derive(Debug, Clone)]
pub struct Cavity {
    config: CavityConfig,
    propagator: CollinsPropagator,
    half_gain: Vec<f64>,
    loss: f64,
    injection_profile: Vec<f64>,
}

impl Cavity {
    pub fn new(config: CavityConfig) -> Result<Self> {
        config.validate()?;
        let grid = TransverseField::zeros(config.grid.points, config.grid.width);
        let propagator = CollinsPropagator::new(&grid, config.round_trip_matrix()?, WAVELENGTH)?;
        let half_gain = grid.positions().map(|x| (0.5 * config.gain.gain_at(x)).exp()).collect();
        let root_t = config.mirror_transmittance.sqrt();
        let injection_profile = grid.positions().map(|x| root_t * config.excitation_profile(x)).collect();
        Ok(Self { config, propagator, half_gain, loss: (-config.round_trip_loss).exp(), injection_profile })
    }

    pub fn config(&self) -> &CavityConfig {
        &self.config
    }

    pub fn empty_field(&self) -> TransverseField {
        TransverseField::zeros(self.config.grid.points, self.config.grid.width)
    }

    /// `A_n e^{inΔ}` scaled by the configured amplitude.
    pub fn injection(&self, n: u64) -> Complex64 {
        let envelope = self.config.excitation.amplitude * excitation_envelope(n as f64, &self.config);
        Complex64::from_polar(envelope, n as f64 * self.config.detuning)
    }

    /// `ψ ← e^{-l} e^{g/2} K̂ e^{g/2} ψ + √T·injected·F`, advancing the round-trip index.
    pub fn round_trip(&self, field: &mut TransverseField, injected: Complex64) -> Result<()> {
        self.apply_operator(field)?;
        if injected != Complex64::new(0.0, 0.0) {
            for (v, f) in field.values.iter_mut().zip(&self.injection_profile) {
                *v += injected * f;
            }
        }
        field.round_trip += 1;
        Ok(())
    }

    /// One round trip driven by the configured pulse.
    pub fn step(&self, field: &mut TransverseField) -> Result<()> {
        let injected = self.injection(field.round_trip);
        self.round_trip(field, injected)
    }

    /// The homogeneous part of the map, without touching the index.
    pub fn apply_operator(&self, field: &mut TransverseField) -> Result<()> {
        self.apply_gain(field);
        self.propagator.apply(field)?;
        self.apply_gain(field);
        field.scale(Complex64::new(self.loss, 0.0));
        Ok(())
    }

    /// Hermitian adjoint of [`Cavity::apply_operator`].
    pub fn apply_adjoint(&self, field: &mut TransverseField) -> Result<()> {
        self.apply_gain(field);
        self.propagator.apply_adjoint(field)?;
        self.apply_gain(field);
        field.scale(Complex64::new(self.loss, 0.0));
        Ok(())
    }

    fn apply_gain(&self, field: &mut TransverseField) {
        for (v, g) in field.values.iter_mut().zip(&self.half_gain) {
            *v *= g;
        }
    }
}

/// One round trip of `field` through a cavity built from `config`.
pub fn round_trip(field: &TransverseField, config: &CavityConfig, injected: Complex64) -> Result<TransverseField> {
    let cavity = Cavity::new(*config)?;
    field.ensure_same_grid(&cavity.empty_field())?;
    let mut out = field.clone();
    cavity.round_trip(&mut out, injected)?;
    Ok(out)
}
