//! Observables of the cavity field and the non-Hermitian signatures built
//! from them: anharmonic center-of-mass motion, the threshold eigenvalue,
//! tilted emission of the fundamental mode and the Petermann factor.

use std::f64::consts::{PI, TAU};
use std::ops::Range;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::optics::{stability_angle, AbcdMatrix, Cavity, CavityConfig, CollinsPropagator, TransverseField};
use crate::oscillator::{GaussianPacket, OscillatorParams};

/// Field magnitude at the window edge, relative to the peak, above which a
/// run is aborted as aliased.
pub const EDGE_TOLERANCE: f64 = 1e-6;

/// Uniformly sampled record of one run. `q[i]` is `None` while the power is
/// too small for the center of mass to mean anything.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ObservableSeries {
    pub n: Vec<u64>,
    pub power: Vec<f64>,
    pub q: Vec<Option<f64>>,
    pub p: Option<Vec<Option<f64>>>,
}

impl ObservableSeries {
    pub fn len(&self) -> usize {
        self.n.len()
    }

    pub fn is_empty(&self) -> bool {
        self.n.is_empty()
    }

    /// Index of round trip `n`, if recorded.
    pub fn index_of(&self, n: u64) -> Option<usize> {
        self.n.iter().position(|&m| m == n)
    }

    /// Indices from round trip `start` to the end of the record.
    pub fn window_from(&self, start: u64) -> Range<usize> {
        let first = self.n.iter().position(|&m| m >= start).unwrap_or(self.len());
        first..self.len()
    }

    fn defined_q(&self, window: &Range<usize>) -> Result<(Vec<f64>, Vec<f64>)> {
        check_window(window, self.len())?;
        let mut t = Vec::with_capacity(window.len());
        let mut q = Vec::with_capacity(window.len());
        for i in window.clone() {
            if let Some(v) = self.q[i] {
                t.push(self.n[i] as f64);
                q.push(v);
            }
        }
        Ok((t, q))
    }
}

fn check_window(window: &Range<usize>, len: usize) -> Result<()> {
    if window.start >= window.end || window.end > len {
        return Err(Error::InsufficientData(format!("window {window:?} outside series of length {len}")));
    }
    Ok(())
}

/// `∫|ψ|² dx` as a Riemann sum.
pub fn power(field: &TransverseField) -> f64 {
    field.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * field.dx
}

/// `∫x|ψ|²dx / ∫|ψ|²dx`, or `None` when the power is at or below `floor`.
pub fn center_of_mass(field: &TransverseField, floor: f64) -> Option<f64> {
    let p = power(field);
    if !(p > floor) {
        return None;
    }
    let first: f64 = field.positions().zip(&field.values).map(|(x, v)| x * v.norm_sqr()).sum();
    Some(first * field.dx / p)
}

/// `Re ∫ψ*(-iħ∂ₓ)ψ dx / ∫|ψ|² dx` with a spectral derivative.
pub fn momentum_expectation(field: &TransverseField, hbar: f64, floor: f64) -> Option<f64> {
    let p = power(field);
    if !(p > floor) {
        return None;
    }
    let n = field.len();
    let mut planner = FftPlanner::new();
    let mut spectrum = field.values.clone();
    planner.plan_fft_forward(n).process(&mut spectrum);
    let df = 1.0 / (n as f64 * field.dx);
    for (k, v) in spectrum.iter_mut().enumerate() {
        let f = if 2 * k < n {
            k as f64
        } else if 2 * k == n {
            0.0
        } else {
            k as f64 - n as f64
        } * df;
        *v *= Complex64::new(0.0, TAU * f / n as f64);
    }
    planner.plan_fft_inverse(n).process(&mut spectrum);
    let overlap: Complex64 = field.values.iter().zip(&spectrum).map(|(a, d)| a.conj() * d).sum();
    Some(hbar * overlap.im * field.dx / p)
}

/// Least-squares slope of `ln P(n)` over `window`, per round trip.
pub fn fit_decay_rate(series: &ObservableSeries, window: Range<usize>) -> Result<f64> {
    check_window(&window, series.len())?;
    if window.len() < 2 {
        return Err(Error::InsufficientData("decay fit needs at least two samples".into()));
    }
    let mut pts = Vec::with_capacity(window.len());
    for i in window {
        let p = series.power[i];
        if !(p > 0.0) {
            return Err(Error::NonPositivePower { index: i, power: p });
        }
        pts.push((series.n[i] as f64, p.ln()));
    }
    Ok(linear_fit(&pts).1)
}

/// `(intercept, slope)` of the ordinary least-squares line.
pub fn linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    (my - slope * mx, slope)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FourierAmplitudes {
    pub offset: f64,
    /// Amplitude of the component at `Ω`.
    pub fundamental: f64,
    /// Amplitude of the component at `2Ω`.
    pub second: f64,
    /// RMS of the fit residual.
    pub residual: f64,
}

impl FourierAmplitudes {
    pub fn ratio(&self) -> f64 {
        self.second / self.fundamental
    }
}

fn harmonic_fit(t: &[f64], y: &[f64], omega: f64) -> Result<(DVector<f64>, f64)> {
    let rows = t.len();
    let design = DMatrix::from_fn(rows, 5, |i, j| {
        let w = omega * t[i];
        match j {
            0 => 1.0,
            1 => w.cos(),
            2 => w.sin(),
            3 => (2.0 * w).cos(),
            _ => (2.0 * w).sin(),
        }
    });
    let rhs = DVector::from_column_slice(y);
    let coeffs = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-12)
        .map_err(|e| Error::InsufficientData(format!("harmonic fit failed: {e}")))?;
    let residual = (&design * &coeffs - rhs).norm() / (rows as f64).sqrt();
    Ok((coeffs, residual))
}

/// Amplitudes of the `Ω` and `2Ω` components of `q(n)` by least-squares
/// sinusoid fitting over `window`.
///
/// `q(n)` is a ratio of power-weighted integrals, so the overall decay of
/// the field drops out and needs no compensation here.
pub fn trajectory_fourier(series: &ObservableSeries, omega: f64, window: Range<usize>) -> Result<FourierAmplitudes> {
    let (t, q) = series.defined_q(&window)?;
    if t.len() < 8 {
        return Err(Error::InsufficientData(format!("{} defined samples; need at least 8", t.len())));
    }
    let span = t[t.len() - 1] - t[0];
    if span * omega < 3.0 * TAU {
        return Err(Error::InsufficientData(format!(
            "window spans {:.2} periods; need at least 3",
            span * omega / TAU
        )));
    }
    let (c, residual) = harmonic_fit(&t, &q, omega)?;
    Ok(FourierAmplitudes { offset: c[0], fundamental: c[1].hypot(c[2]), second: c[3].hypot(c[4]), residual })
}

/// Fundamental angular frequency of `q(n)` within `[lo, hi]`, found by
/// minimizing the residual of a two-harmonic fit.
pub fn estimate_frequency(series: &ObservableSeries, window: Range<usize>, lo: f64, hi: f64) -> Result<f64> {
    let (t, q) = series.defined_q(&window)?;
    if t.len() < 8 {
        return Err(Error::InsufficientData(format!("{} defined samples; need at least 8", t.len())));
    }
    let cost = |w: f64| harmonic_fit(&t, &q, w).map(|(_, r)| r).unwrap_or(f64::INFINITY);
    let coarse = 400;
    let step = (hi - lo) / coarse as f64;
    let best = (0..=coarse)
        .map(|i| lo + i as f64 * step)
        .min_by(|a, b| cost(*a).total_cmp(&cost(*b)))
        .unwrap_or(lo);

    // golden-section refinement inside the winning cell
    let (mut a, mut b) = ((best - step).max(lo), (best + step).min(hi));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut c, mut d) = (b - g * (b - a), a + g * (b - a));
    let (mut fc, mut fd) = (cost(c), cost(d));
    while b - a > 1e-12 * (1.0 + best.abs()) {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = cost(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = cost(d);
        }
    }
    Ok(0.5 * (a + b))
}

/// One pulsed run: the observables after every round trip plus the
/// requested field snapshots.
#[derive(Debug, Clone)]
pub struct PulseRun {
    pub series: ObservableSeries,
    pub snapshots: Vec<TransverseField>,
}

/// Runs the injected cavity from an empty field for `round_trips` round
/// trips, recording `ψ_1 … ψ_N`.
pub fn simulate_pulse(cavity: &Cavity, round_trips: u64, snapshots_at: &[u64], hbar: f64) -> Result<PulseRun> {
    let cfg = cavity.config();
    let e = &cfg.excitation;
    let reference = cfg.mirror_transmittance * e.amplitude * e.amplitude * e.waist * (PI / 2.0).sqrt();
    let floor = 1e-12 * reference;
    let mut field = cavity.empty_field();
    let mut run = PulseRun { series: ObservableSeries { p: Some(Vec::new()), ..Default::default() }, snapshots: Vec::new() };
    for _ in 0..round_trips {
        cavity.step(&mut field)?;
        let ratio = field.edge_ratio();
        if ratio > EDGE_TOLERANCE {
            return Err(Error::Aliasing { round_trip: field.round_trip, ratio });
        }
        let s = &mut run.series;
        s.n.push(field.round_trip);
        s.power.push(power(&field));
        s.q.push(center_of_mass(&field, floor));
        if let Some(p) = s.p.as_mut() {
            p.push(momentum_expectation(&field, hbar, floor));
        }
        if snapshots_at.contains(&field.round_trip) {
            run.snapshots.push(field.clone());
        }
    }
    Ok(run)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub max_iterations: usize,
    /// Convergence threshold on successive eigenvalue estimates.
    pub tolerance: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { max_iterations: 20_000, tolerance: 1e-10 }
    }
}

#[derive(Debug, Clone)]
pub struct Eigenpair {
    /// Unit-power mode.
    pub mode: TransverseField,
    pub eigenvalue: Complex64,
    pub iterations: usize,
}

/// Waist `√|2B/(k sin θ)|` of the passive-cavity fundamental mode at the
/// reference plane.
pub fn cavity_mode_waist(m: &AbcdMatrix, wavelength: f64) -> Result<f64> {
    let theta = stability_angle(m)?;
    Ok((2.0 * m.b * wavelength / (TAU * theta.sin())).abs().sqrt())
}

/// Fundamental eigenpair of the homogeneous round-trip operator.
pub fn round_trip_eigenpair(config: &CavityConfig) -> Result<Eigenpair> {
    cavity_eigenpair(&Cavity::new(*config)?, EigenOptions::default(), false)
}

/// Shifted power iteration `v ← (L + λ̂)v / ‖·‖`, started from the passive
/// fundamental Gaussian, with `λ̂` the running Rayleigh quotient.
///
/// Every mode of the emulated oscillator has the same modulus
/// `e^{g₀-l}` and the modes differ only in phase, so the plain power method
/// stalls. Adding the current estimate makes the fundamental strictly
/// dominant with ratio `|cos(jθ/2)|` for mode `j`. With `adjoint` the
/// iteration runs on `L†`, giving the left eigenvector.
pub fn cavity_eigenpair(cavity: &Cavity, options: EigenOptions, adjoint: bool) -> Result<Eigenpair> {
    let cfg = cavity.config();
    let w0 = cavity_mode_waist(&cfg.round_trip_matrix()?, crate::oscillator::WAVELENGTH)?;
    let mut v = cavity.empty_field().like(|x| Complex64::new((-(x * x) / (w0 * w0)).exp(), 0.0));
    v.normalize();
    let apply = |f: &mut TransverseField| if adjoint { cavity.apply_adjoint(f) } else { cavity.apply_operator(f) };

    let mut estimate: Option<Complex64> = None;
    let mut change = f64::INFINITY;
    for iteration in 1..=options.max_iterations {
        let mut w = v.clone();
        apply(&mut w)?;
        let lambda = v.inner(&w)?;
        if let Some(prev) = estimate {
            change = (lambda - prev).norm();
            if change < options.tolerance {
                return Ok(Eigenpair { mode: v, eigenvalue: lambda, iterations: iteration });
            }
        }
        estimate = Some(lambda);
        for (wi, vi) in w.values.iter_mut().zip(&v.values) {
            *wi += lambda * vi;
        }
        if w.normalize() == 0.0 {
            return Err(Error::NoConvergence { iterations: iteration, change });
        }
        v = w;
    }
    Err(Error::NoConvergence { iterations: options.max_iterations, change })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub peak_gain: f64,
    /// On-axis gain `g₀` at which `|λ| = 1`.
    pub axis_gain: f64,
    pub evaluations: usize,
}

/// Pump level at which the fundamental eigenvalue reaches unit modulus,
/// found by secant iteration on `ln|λ|` as a function of the peak gain with
/// the pump geometry held fixed.
pub fn threshold_pump(config: &CavityConfig, options: EigenOptions) -> Result<Threshold> {
    let log_modulus = |peak: f64| -> Result<f64> {
        let mut c = *config;
        c.gain.peak = peak;
        Ok(cavity_eigenpair(&Cavity::new(c)?, options, false)?.eigenvalue.norm().ln())
    };
    let shape = crate::optics::GainProfile { peak: 1.0, ..config.gain }.gain_at(0.0);
    if !(shape > 0.0) {
        return Err(Error::InvalidParameter { name: "gain", reason: "pump does not reach the axis".into() });
    }
    let mut x0 = config.round_trip_loss / shape * 0.9;
    let mut x1 = config.round_trip_loss / shape;
    let mut f0 = log_modulus(x0)?;
    let mut f1 = log_modulus(x1)?;
    let mut evaluations = 2;
    while f1.abs() > 1e-12 && evaluations < 30 {
        let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
        x0 = x1;
        f0 = f1;
        x1 = x2;
        f1 = log_modulus(x1)?;
        evaluations += 1;
    }
    Ok(Threshold { peak_gain: x1, axis_gain: x1 * shape, evaluations })
}

/// `θ_tilt = λδ/(πw₀²)`.
pub fn tilt_angle(delta: f64, w0: f64, wavelength: f64) -> f64 {
    wavelength * delta / (PI * w0 * w0)
}

/// Far-field divergence `θ_d = λ/(πw₀)`.
pub fn divergence_angle(w0: f64, wavelength: f64) -> f64 {
    wavelength / (PI * w0)
}

/// `θ_tilt/θ_d = δ/w₀`.
pub fn tilt_ratio(delta: f64, w0: f64) -> f64 {
    delta / w0
}

/// Slope `dx/dz` expected for the fundamental mode in free space.
///
/// The mode carries momentum `p₀ = mΩδ`, so the emulated particle drifts at
/// `Ωδ` once the trap is removed. A free-space section of length `dz` acts
/// like a particle of mass `-1/dz` in the same picture (the kernel sign
/// convention), which turns the drift into a transverse slope of
/// `-p₀ = -mΩδ = -θ_tilt`.
pub fn expected_free_drift_slope(params: &OscillatorParams) -> f64 {
    -params.mass * params.omega * params.delta
}

/// Propagates `mode` through `steps` free-space sections of length `dz`
/// and returns the least-squares slope of its center against distance.
pub fn free_drift_check(mode: &TransverseField, params: &OscillatorParams, steps: usize, dz: f64) -> Result<f64> {
    if steps == 0 {
        return Err(Error::InsufficientData("free drift needs at least one step".into()));
    }
    let wavelength = TAU * params.hbar;
    let propagator = CollinsPropagator::new(mode, AbcdMatrix::free_space(dz), wavelength)?;
    let mut field = mode.clone();
    let centroid = |f: &TransverseField| {
        center_of_mass(f, 0.0).ok_or_else(|| Error::InsufficientData("mode has zero power".into()))
    };
    let mut points = vec![(0.0, centroid(&field)?)];
    for step in 1..=steps {
        propagator.apply(&mut field)?;
        let ratio = field.edge_ratio();
        if ratio > EDGE_TOLERANCE {
            return Err(Error::Aliasing { round_trip: step as u64, ratio });
        }
        points.push((step as f64 * dz, centroid(&field)?));
    }
    Ok(linear_fit(&points).1)
}

/// Closed-form Petermann factor `K = exp[(2δ/w₀)²]`.
pub fn petermann(delta: f64, w0: f64) -> f64 {
    let r = 2.0 * delta / w0;
    (r * r).exp()
}

/// `K = ⟨ψ,ψ⟩⟨ψ†,ψ†⟩ / |⟨ψ,ψ†⟩|²` by quadrature.
pub fn petermann_numeric(mode: &TransverseField, adjoint_mode: &TransverseField) -> Result<f64> {
    let cross = mode.inner(adjoint_mode)?;
    let a = mode.inner(mode)?.re;
    let b = adjoint_mode.inner(adjoint_mode)?.re;
    if cross.norm() <= 1e-300 || cross.norm() < 1e-12 * (a * b).sqrt() {
        return Err(Error::DegenerateOverlap(cross.norm()));
    }
    Ok(a * b / cross.norm_sqr())
}

/// `|⟨a,b⟩|² / (⟨a,a⟩⟨b,b⟩)`.
pub fn normalized_overlap(a: &TransverseField, b: &TransverseField) -> Result<f64> {
    Ok(a.inner(b)?.norm_sqr() / (a.inner(a)?.re * b.inner(b)?.re))
}

/// Samples a packet on the grid of `like`.
pub fn sample_packet(packet: &GaussianPacket, like: &TransverseField) -> TransverseField {
    like.like(|x| packet.eval(x))
}
