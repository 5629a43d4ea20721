//! Exact dynamics of the PT-symmetric harmonic oscillator
//!
//! ```text
//! H = -ħ²/(2m) d²/dx² + ½ m Ω² (x - iδ)²
//! ```
//!
//! `H` is the Hermitian oscillator conjugated by the complex translation
//! `x -> x - iδ`, so every Gaussian stays Gaussian. Packets are stored as
//! `ψ(x) = exp(-a x² + b x + c)` with complex coefficients and evolved in
//! closed form, which stays finite through the caustics `Ωt = nπ` where the
//! Mehler kernel degenerates.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{check, Error, Result};

/// Optical wavelength in internal units.
pub const WAVELENGTH: f64 = 1.0;

/// Analog of the reduced Planck constant, `1/k = λ/2π`.
pub const HBAR: f64 = WAVELENGTH / (2.0 * PI);

/// `|sin Ωt|` below which [`mehler_kernel`] reports a singular time.
pub const KERNEL_SINGULAR_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillatorParams {
    pub mass: f64,
    /// Radians per unit time (per round trip in the cavity picture).
    pub omega: f64,
    /// Imaginary displacement of the coordinate; zero is the Hermitian limit.
    pub delta: f64,
    pub hbar: f64,
}

impl OscillatorParams {
    pub fn new(mass: f64, omega: f64, delta: f64, hbar: f64) -> Result<Self> {
        check(mass.is_finite() && mass > 0.0, "mass", || format!("must be positive, got {mass}"))?;
        check(omega.is_finite() && omega > 0.0, "omega", || {
            format!("must be positive, got {omega}")
        })?;
        check(hbar.is_finite() && hbar > 0.0, "hbar", || format!("must be positive, got {hbar}"))?;
        check(delta.is_finite(), "delta", || format!("must be finite, got {delta}"))?;
        Ok(Self { mass, omega, delta, hbar })
    }

    /// Same oscillator with the displacement removed.
    pub fn hermitian(&self) -> Self {
        Self { delta: 0.0, ..*self }
    }

    /// `ρ = mΩ/2ħ`, the Gaussian exponent of the ground state.
    pub fn rho(&self) -> f64 {
        self.mass * self.omega / (2.0 * self.hbar)
    }

    /// Waist `w₀ = 1/√ρ` of the fundamental mode.
    pub fn mode_waist(&self) -> f64 {
        1.0 / self.rho().sqrt()
    }

    pub fn period(&self) -> f64 {
        2.0 * PI / self.omega
    }
}

/// Gaussian wave packet `ψ(x) = exp(-a x² + b x + c)`.
///
/// `c` carries normalization and global phase; neither is meaningful for
/// observables, which are all ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GaussianPacket {
    pub a: Complex64,
    pub b: Complex64,
    pub c: Complex64,
}

impl GaussianPacket {
    pub fn from_coefficients(a: Complex64, b: Complex64, c: Complex64) -> Result<Self> {
        if !(a.re > 0.0) || !a.is_finite() || !b.is_finite() {
            return Err(Error::NotNormalizable(a.re));
        }
        Ok(Self { a, b, c })
    }

    /// `exp[-σ(x - q₀)² + i p₀ x/ħ]`.
    pub fn coherent(q0: f64, p0: f64, sigma: f64, hbar: f64) -> Result<Self> {
        check(sigma.is_finite() && sigma > 0.0, "sigma", || {
            format!("must be positive, got {sigma}")
        })?;
        Self::from_coefficients(
            Complex64::new(sigma, 0.0),
            Complex64::new(2.0 * sigma * q0, p0 / hbar),
            Complex64::new(-sigma * q0 * q0, 0.0),
        )
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        (-self.a * x * x + self.b * x + self.c).exp()
    }

    /// Mean position of `|ψ|²`.
    pub fn center(&self) -> f64 {
        self.b.re / (2.0 * self.a.re)
    }

    /// `Re ∫ψ*(-iħ∂ₓ)ψ / ∫|ψ|²`.
    pub fn momentum(&self, hbar: f64) -> f64 {
        hbar * (self.b.im - 2.0 * self.a.im * self.center())
    }

    /// `∫|ψ|² dx`.
    pub fn norm_sqr(&self) -> f64 {
        let ar = self.a.re;
        (PI / (2.0 * ar)).sqrt() * (2.0 * self.c.re + self.b.re * self.b.re / (2.0 * ar)).exp()
    }

    /// Position variance of `|ψ|²`.
    pub fn position_variance(&self) -> f64 {
        1.0 / (4.0 * self.a.re)
    }

    fn displaced(&self, shift: Complex64) -> Self {
        // ψ'(y) = ψ(y + shift)
        Self {
            a: self.a,
            b: self.b - 2.0 * self.a * shift,
            c: self.c - self.a * shift * shift + self.b * shift,
        }
    }
}

/// Mehler kernel of the Hermitian oscillator at real arguments.
pub fn mehler_kernel(x: f64, xi: f64, t: f64, params: &OscillatorParams) -> Result<Complex64> {
    mehler_kernel_complex(Complex64::new(x, 0.0), Complex64::new(xi, 0.0), t, params)
}

/// Mehler kernel continued to complex arguments.
///
/// The prefactor carries the Maslov phase `e^{-iπ/4 - iπj/2}` with
/// `j = ⌊Ωt/π⌋`, which is the principal branch on `(0, π/Ω)` extended
/// continuously through each caustic.
pub fn mehler_kernel_complex(
    x: Complex64,
    xi: Complex64,
    t: f64,
    params: &OscillatorParams,
) -> Result<Complex64> {
    let phase = params.omega * t;
    let (s, c) = phase.sin_cos();
    if s.abs() < KERNEL_SINGULAR_TOLERANCE {
        return Err(Error::SingularTime { phase, tolerance: KERNEL_SINGULAR_TOLERANCE });
    }
    let m_omega = params.mass * params.omega;
    let caustics = (phase / PI).floor();
    let modulus = (m_omega / (2.0 * PI * params.hbar * s.abs())).sqrt();
    let prefactor = Complex64::from_polar(modulus, -FRAC_PI_4 - FRAC_PI_2 * caustics);
    let kappa = Complex64::new(0.0, m_omega / (2.0 * params.hbar * s));
    Ok(prefactor * (kappa * ((x * x + xi * xi) * c - 2.0 * x * xi)).exp())
}

/// Exact evolution of a Gaussian packet under the PT-symmetric Hamiltonian.
pub fn propagate_packet(
    packet: &GaussianPacket,
    t: f64,
    params: &OscillatorParams,
) -> Result<GaussianPacket> {
    check(t.is_finite() && t >= 0.0, "t", || format!("must be non-negative, got {t}"))?;
    if !(packet.a.re > 0.0) {
        return Err(Error::NotNormalizable(packet.a.re));
    }
    let shift = Complex64::new(0.0, params.delta);
    let hermitian = evolve_hermitian(&packet.displaced(shift), t, params);
    GaussianPacket::from_coefficients(hermitian.a, hermitian.b, hermitian.c)
        .map(|p| p.displaced(-shift))
}

// Riccati solution a = κ u̇/u with ü = -Ω²u, κ = -im/2ħ; then b = b₀/u and
// c follows by quadrature using ∫dt/u² = sin(Ωt)/(Ω u).
fn evolve_hermitian(p: &GaussianPacket, t: f64, params: &OscillatorParams) -> GaussianPacket {
    let (m, omega, hbar) = (params.mass, params.omega, params.hbar);
    let i = Complex64::i();
    let kappa = -i * m / (2.0 * hbar);
    let du0 = p.a * 2.0 * i * hbar / m;
    let phase = omega * t;
    let (s, c) = phase.sin_cos();
    let u = c + du0 * (s / omega);
    let du = -omega * s + du0 * c;

    // u winds counter-clockwise around the origin in step with Ωt, so the
    // continuous argument stays within π of Ωt.
    let principal = u.arg();
    let turns = ((phase - principal) / (2.0 * PI)).round();
    let log_u = Complex64::new(u.norm().ln(), principal + 2.0 * PI * turns);

    GaussianPacket {
        a: kappa * du / u,
        b: p.b / u,
        c: p.c - 0.5 * log_u + i * (hbar / (2.0 * m)) * p.b * p.b * (s / (omega * u)),
    }
}

/// Harmonic and non-Hermitian parts of the center-of-mass trajectory of the
/// packet `exp[-σ(x - q₀)² + i p₀ x/ħ]`.
pub fn center_of_mass_closed_form(
    t: f64,
    q0: f64,
    p0: f64,
    sigma: f64,
    params: &OscillatorParams,
) -> Result<(f64, f64)> {
    check(sigma.is_finite() && sigma > 0.0, "sigma", || {
        format!("must be positive, got {sigma}")
    })?;
    let OscillatorParams { mass: m, omega, delta, hbar } = *params;
    let (s1, c1) = (omega * t).sin_cos();
    let s2 = (2.0 * omega * t).sin();
    let q_h = q0 * c1 + p0 / (m * omega) * s1;
    let ratio = sigma * hbar / (m * omega);
    let q_nh = delta * (ratio - 1.0 / (4.0 * ratio)) * s2 - 2.0 * delta * ratio * s1;
    Ok((q_h, q_nh))
}

/// Coefficients `(c₂, c₁)` of `q_NH(t) = c₂ sin 2Ωt + c₁ sin Ωt`.
pub fn non_hermitian_coefficients(sigma: f64, params: &OscillatorParams) -> (f64, f64) {
    let ratio = sigma * params.hbar / (params.mass * params.omega);
    (params.delta * (ratio - 1.0 / (4.0 * ratio)), -2.0 * params.delta * ratio)
}

/// Fundamental mode `exp[-ρ(x - iδ)²]`, carrying momentum `mΩδ`.
pub fn fundamental_mode(params: &OscillatorParams) -> GaussianPacket {
    let rho = params.rho();
    GaussianPacket {
        a: Complex64::new(rho, 0.0),
        b: Complex64::new(0.0, 2.0 * rho * params.delta),
        c: Complex64::new(rho * params.delta * params.delta, 0.0),
    }
}

/// Speed `v₀ = p₀/m = Ωδ` of the fundamental mode once the trap is removed.
pub fn free_drift_velocity(params: &OscillatorParams) -> f64 {
    params.omega * params.delta
}
