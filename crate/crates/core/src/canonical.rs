//! Generalized canonical equations: mean position and momentum coupled to
//! the covariance matrix of a Gaussian state.
//!
//! Covariances are stored in units of `ħ/2`, i.e. `Σqq = (2/ħ)⟨Δx²⟩`,
//! `Σpp = (2/ħ)⟨Δp²⟩`, `Σpq = (2/ħ)⟨{Δx,Δp}/2⟩`. In these units a pure
//! Gaussian has `ΣqqΣpp - Σpq² = 1`, and the mean-value equations below
//! reproduce the closed-form trajectory exactly.

use std::ops::{Add, Mul};

use serde::Serialize;

use crate::error::{check, Error, Result};
use crate::oscillator::OscillatorParams;

/// Relative drift of the purity that [`integrate`] treats as a failure.
pub const PURITY_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct CovarianceState {
    pub q: f64,
    pub p: f64,
    pub sqq: f64,
    pub spp: f64,
    pub spq: f64,
}

impl CovarianceState {
    /// `ΣqqΣpp - Σpq²`; one for a pure Gaussian.
    pub fn purity(&self) -> f64 {
        self.sqq * self.spp - self.spq * self.spq
    }

    pub fn is_physical(&self) -> bool {
        self.sqq > 0.0 && self.spp > 0.0 && self.purity() >= 1.0 - 1e-9
    }
}

impl Add for CovarianceState {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        Self {
            q: self.q + o.q,
            p: self.p + o.p,
            sqq: self.sqq + o.sqq,
            spp: self.spp + o.spp,
            spq: self.spq + o.spq,
        }
    }
}

impl Mul<f64> for CovarianceState {
    type Output = Self;

    fn mul(self, h: f64) -> Self {
        Self { q: self.q * h, p: self.p * h, sqq: self.sqq * h, spp: self.spp * h, spq: self.spq * h }
    }
}

/// Time derivative of every component.
pub fn canonical_rhs(s: &CovarianceState, params: &OscillatorParams) -> CovarianceState {
    let m = params.mass;
    let k = m * params.omega * params.omega;
    CovarianceState {
        q: s.p / m - k * params.delta * s.sqq,
        p: -k * s.q - k * params.delta * s.spq,
        sqq: 2.0 * s.spq / m,
        spp: -2.0 * k * s.spq,
        spq: s.spp / m - k * s.sqq,
    }
}

/// Covariance state of the packet `exp[-σ(x - q₀)² + i p₀ x/ħ]`.
pub fn init_from_packet(
    sigma: f64,
    q0: f64,
    p0: f64,
    params: &OscillatorParams,
) -> Result<CovarianceState> {
    check(sigma.is_finite() && sigma > 0.0, "sigma", || {
        format!("must be positive, got {sigma}")
    })?;
    Ok(CovarianceState {
        q: q0,
        p: p0,
        sqq: 1.0 / (2.0 * sigma * params.hbar),
        spp: 2.0 * sigma * params.hbar,
        spq: 0.0,
    })
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CovarianceState>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<(f64, CovarianceState)> {
        Some((*self.times.last()?, *self.states.last()?))
    }

    /// Keeps every `stride`-th sample plus the final one.
    pub fn decimate(&self, stride: usize) -> Trajectory {
        let stride = stride.max(1);
        let n = self.len();
        let keep = (0..n).filter(|&i| i % stride == 0 || i + 1 == n);
        let (times, states) = keep.map(|i| (self.times[i], self.states[i])).unzip();
        Trajectory { times, states }
    }
}

fn rk4_step(s: &CovarianceState, h: f64, params: &OscillatorParams) -> CovarianceState {
    let k1 = canonical_rhs(s, params);
    let k2 = canonical_rhs(&(*s + k1 * (h / 2.0)), params);
    let k3 = canonical_rhs(&(*s + k2 * (h / 2.0)), params);
    let k4 = canonical_rhs(&(*s + k3 * h), params);
    *s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

/// Fixed-step classical Runge-Kutta over `[0, t_end]`, sampled at every step.
///
/// The last step is shortened when `t_end` is not a multiple of `dt`.
pub fn integrate(
    state0: &CovarianceState,
    t_end: f64,
    dt: f64,
    params: &OscillatorParams,
) -> Result<Trajectory> {
    check(dt.is_finite() && dt > 0.0, "dt", || format!("must be positive, got {dt}"))?;
    check(t_end.is_finite() && t_end >= 0.0, "t_end", || {
        format!("must be non-negative, got {t_end}")
    })?;
    if !state0.is_physical() {
        return Err(Error::IntegratorFailure {
            t: 0.0,
            reason: format!("initial covariance violates the uncertainty relation: {state0:?}"),
        });
    }

    let full_steps = ((t_end / dt) * (1.0 + 1e-12)).floor() as usize;
    let remainder = t_end - full_steps as f64 * dt;
    let capacity = full_steps + 2;
    let mut traj = Trajectory { times: Vec::with_capacity(capacity), states: Vec::with_capacity(capacity) };
    let purity0 = state0.purity();
    let mut state = *state0;
    traj.times.push(0.0);
    traj.states.push(state);

    let mut advance = |state: &mut CovarianceState, t: f64, h: f64| -> Result<()> {
        *state = rk4_step(state, h, params);
        let drift = (state.purity() - purity0).abs() / purity0;
        if !(drift <= PURITY_TOLERANCE) || state.sqq <= 0.0 || state.spp <= 0.0 {
            return Err(Error::IntegratorFailure {
                t,
                reason: format!("purity drifted by {drift:e}; reduce dt"),
            });
        }
        traj.times.push(t);
        traj.states.push(*state);
        Ok(())
    };

    for step in 1..=full_steps {
        advance(&mut state, step as f64 * dt, dt)?;
    }
    if remainder > dt * 1e-9 {
        advance(&mut state, t_end, remainder)?;
    }
    Ok(traj)
}
