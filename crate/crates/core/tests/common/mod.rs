//! Brute-force oracles shared by the integration tests. Nothing here calls
//! into the propagation code it is used to check.

#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use pt_cavity::optics::{AbcdMatrix, TransverseField};
use pt_cavity::oscillator::OscillatorParams;

/// Center of mass of `ψ(x,t) = ∫dξ U(x - iδ, ξ - iδ, t) ψ₀(ξ)` with
/// `ψ₀ = exp[-σ(ξ - q₀)² + i p₀ξ/ħ]`, the ξ-integral done by the trapezoid
/// rule on `quad_points` nodes.
///
/// The displaced kernel grows like `exp[2κδ(cos Ωt - 1)x]`, so far from the
/// packet the true integral is swamped by amplified roundoff. A coarse scan
/// over `±search` first locates the packet among points whose value is well
/// above the roundoff floor; the moments are then taken on `out_points`
/// nodes spanning twelve standard deviations either side of it, again
/// skipping points lost in the floor. The skipped side is the one where the
/// cancellation is severe, and it lies far out in the packet's tail.
///
/// Requires `|sin Ωt|` well away from zero.
#[allow(clippy::too_many_arguments)]
pub fn mehler_center(
    q0: f64,
    p0: f64,
    sigma: f64,
    params: &OscillatorParams,
    t: f64,
    quad_points: usize,
    out_points: usize,
    search: f64,
) -> f64 {
    let (m, omega, delta, hbar) = (params.mass, params.omega, params.delta, params.hbar);
    let (s, c) = (omega * t).sin_cos();
    assert!(s.abs() > 0.05, "oracle needs a non-caustic time");
    let kappa = m * omega / (2.0 * hbar * s);
    let i = Complex64::i();
    let shift = Complex64::new(0.0, -delta);

    // The displaced kernel moves the peak of |integrand| to this point.
    let center = q0 + kappa * delta * (c - 1.0) / sigma;
    let half = 14.0 / sigma.sqrt();
    let dxi = 2.0 * half / (quad_points - 1) as f64;
    let xi0 = center - half;

    // g_j = ψ₀(ξ_j) exp[iκ cos·(ξ_j - iδ)²]
    let g: Vec<Complex64> = (0..quad_points)
        .map(|j| {
            let xi = xi0 + j as f64 * dxi;
            let z = xi + shift;
            let psi0 = Complex64::new(-sigma * (xi - q0) * (xi - q0), p0 * xi / hbar).exp();
            let w = if j == 0 || j + 1 == quad_points { 0.5 } else { 1.0 };
            psi0 * (i * kappa * c * z * z).exp() * w
        })
        .collect();

    // (|ψ(x)|², reliable)
    let density = |x: f64| -> (f64, bool) {
        let big_x = x + shift;
        // Σ_j g_j exp[-2iκ X (ξ_j - iδ)] by geometric recurrence, re-anchored
        // every few steps so the recurrence error stays near one ulp
        let exponent = |j: usize| (-2.0 * i * kappa * big_x * (xi0 + j as f64 * dxi + shift)).exp();
        let step = (-2.0 * i * kappa * big_x * dxi).exp();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut magnitude = 0.0;
        let mut phase = Complex64::new(0.0, 0.0);
        for (j, gj) in g.iter().enumerate() {
            phase = if j % 16 == 0 { exponent(j) } else { phase * step };
            let term = gj * phase;
            acc += term;
            magnitude += term.norm();
        }
        // at least four significant digits survive the cancellation
        let reliable = acc.norm() > 1e-12 * magnitude;
        ((acc * (i * kappa * c * big_x * big_x).exp()).norm_sqr(), reliable)
    };

    let moments = |lo: f64, hi: f64, points: usize| -> (f64, f64, f64) {
        let dx = (hi - lo) / (points - 1) as f64;
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for k in 0..points {
            let x = lo + k as f64 * dx;
            let (d, ok) = density(x);
            if ok {
                m0 += d;
                m1 += x * d;
                m2 += x * x * d;
            }
        }
        (m0, m1 / m0, (m2 / m0 - (m1 / m0).powi(2)).max(0.0).sqrt())
    };

    let (_, mean, std) = moments(-search, search, 801);
    let (_, q, _) = moments(mean - 12.0 * std, mean + 12.0 * std, out_points);
    q
}

/// Direct `O(N²)` evaluation of the Collins integral
/// `∫ √(i/λB) exp[-iπ/(λB)(Dx² + Aξ² - 2xξ)] ψ(ξ) dξ` on the field's grid.
pub fn collins_quadrature(field: &TransverseField, m: &AbcdMatrix, wavelength: f64) -> TransverseField {
    let lb = wavelength * m.b;
    let prefactor = Complex64::new(0.0, -lb).sqrt().inv();
    let mut out = field.clone();
    for (k, v) in out.values.iter_mut().enumerate() {
        let x = field.x(k);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, psi) in field.values.iter().enumerate() {
            let xi = field.x(j);
            let phase = -PI / lb * (m.d * x * x + m.a * xi * xi - 2.0 * x * xi);
            acc += Complex64::from_polar(1.0, phase) * psi;
        }
        *v = prefactor * acc * field.dx;
    }
    out
}

/// Gaussian beam `exp[-iπx²/(λq)]`.
pub fn gaussian_beam(points: usize, width: f64, q: Complex64, wavelength: f64) -> TransverseField {
    TransverseField::from_fn(points, width, |x| (Complex64::new(0.0, -PI * x * x / wavelength) / q).exp())
}

/// Beam parameter `q` recovered from the sampled field by a least-squares
/// fit of `ln ψ(x) - ln ψ(0) = -iπx²/(λq)` over samples above `1e-3` of the
/// peak, with the phase unwrapped outward from the axis.
pub fn fit_beam_parameter(field: &TransverseField, wavelength: f64) -> Complex64 {
    let n = field.len();
    let center = (0..n).min_by(|&a, &b| field.x(a).abs().total_cmp(&field.x(b).abs())).unwrap();
    let peak = field.peak();
    let log0 = field.values[center].ln();
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for dir in [1isize, -1] {
        let mut prev_phase = log0.im;
        let mut j = center as isize + dir;
        while j >= 0 && (j as usize) < n {
            let v = field.values[j as usize];
            if v.norm() < 1e-3 * peak {
                break;
            }
            let mut phase = v.arg();
            phase += (2.0 * PI) * ((prev_phase - phase) / (2.0 * PI)).round();
            prev_phase = phase;
            let y = Complex64::new(v.norm().ln(), phase) - log0;
            let x2 = field.x(j as usize).powi(2);
            num += y * x2;
            den += x2 * x2;
            j += dir;
        }
    }
    // y ≈ s·x² with s = -iπ/(λq)
    let s = num / den;
    Complex64::new(0.0, -PI / wavelength) / s
}
