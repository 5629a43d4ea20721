//! Acceptance suite: one PASS/FAIL line per criterion, tolerances as
//! specified, nonzero exit status if any criterion fails.
//!
//! Run with `cargo test -p pt-cavity --test acceptance`.

mod common;

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::Instant;

use num_complex::Complex64;
use pt_cavity::canonical::{init_from_packet, integrate};
use pt_cavity::diagnostics::{
    divergence_angle, estimate_frequency, expected_free_drift_slope, free_drift_check, normalized_overlap, petermann,
    petermann_numeric, round_trip_eigenpair, sample_packet, simulate_pulse, threshold_pump, tilt_ratio,
    trajectory_fourier, EigenOptions,
};
use pt_cavity::optics::{collins_propagate, AbcdMatrix, Cavity, CavityConfig, GridSpec, TransverseField};
use pt_cavity::oscillator::{center_of_mass_closed_form, fundamental_mode, OscillatorParams, HBAR, WAVELENGTH};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};

struct Verdict {
    name: &'static str,
    passed: bool,
    detail: String,
}

impl Verdict {
    fn print(&self) {
        println!("{} {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail);
    }
}

fn closed_q(t: f64, q0: f64, p0: f64, sigma: f64, p: &OscillatorParams) -> f64 {
    let (h, nh) = center_of_mass_closed_form(t, q0, p0, sigma, p).unwrap();
    h + nh
}

struct PulseResult {
    ratio: f64,
    period: f64,
    max_deviation: f64,
    peak_excursion: f64,
    seconds: f64,
}

/// Runs the pulsed cavity for 60 round trips and compares the
/// post-excitation center of mass with the closed-form trajectory.
fn pulse(config: CavityConfig) -> PulseResult {
    let p = config.oscillator_params().unwrap();
    let start = Instant::now();
    let run = simulate_pulse(&Cavity::new(config).unwrap(), 60, &[], HBAR).unwrap();
    let seconds = start.elapsed().as_secs_f64();
    let window = run.series.window_from(config.post_excitation_start());
    let ratio = trajectory_fourier(&run.series, p.omega, window.clone()).unwrap().ratio();
    let omega = estimate_frequency(&run.series, window.clone(), 0.5 * p.omega, 1.5 * p.omega).unwrap();
    let origin = (config.pulse_peak_round_trip() + 1) as u64;
    let sigma = config.excitation_sigma();
    let (mut max_deviation, mut peak_excursion) = (0.0f64, 0.0f64);
    for i in window {
        let t = (run.series.n[i] - origin) as f64;
        let theory = closed_q(t, config.excitation.center, 0.0, sigma, &p);
        let q = run.series.q[i].unwrap();
        max_deviation = max_deviation.max((q - theory).abs());
        peak_excursion = peak_excursion.max(q.abs());
    }
    PulseResult { ratio, period: 2.0 * PI / omega, max_deviation, peak_excursion, seconds }
}

fn reference_trajectory() -> Verdict {
    let r = pulse(CavityConfig::fig2());
    let passed = r.max_deviation <= 0.5 && (r.period - 13.9).abs() <= 0.3 && r.seconds < 30.0;
    Verdict {
        name: "reference-run trajectory vs closed form",
        passed,
        detail: format!(
            "max deviation {:.4} λ (≤ 0.5) at peak excursion {:.2} λ; period {:.4} round trips (13.9 ± 0.3); runtime {:.3} s (< 30)",
            r.max_deviation, r.peak_excursion, r.period, r.seconds
        ),
    }
}

fn anharmonicity() -> Verdict {
    let base = CavityConfig::fig2();
    let reference = pulse(base).ratio;
    let mut hermitian = base;
    hermitian.gain.offset = 0.0;
    hermitian.excitation.center = 10.0;
    let hermitian = pulse(hermitian).ratio;
    let mut matched = base;
    matched.excitation.waist = base.oscillator_params().unwrap().mode_waist();
    let matched = pulse(matched).ratio;
    let passed = (reference - 0.47).abs() <= 0.05 && hermitian < 1e-2 && matched < 1e-2;
    Verdict {
        name: "2Ω/Ω discrimination",
        passed,
        detail: format!(
            "tilted mismatched {reference:.4} (0.47 ± 0.05); untilted {hermitian:.3e} (< 1e-2); matched waist {matched:.3e} (< 1e-2)"
        ),
    }
}

const SAMPLE_PHASES: [f64; 10] = [0.3, 0.9, 1.3, 2.0, 2.6, 3.7, 4.4, 5.1, 7.0, 8.1];

/// Worst relative disagreement among the three routes for one draw.
fn triple_oracle_draw(params: OscillatorParams, q0: f64, p0: f64, sigma: f64) -> f64 {
    let w = (params.hbar / (params.mass * params.omega)).sqrt();
    let times: Vec<f64> = SAMPLE_PHASES.iter().map(|ph| ph / params.omega).collect();
    let closed: Vec<f64> = times.iter().map(|&t| closed_q(t, q0, p0, sigma, &params)).collect();
    let scale = closed.iter().fold(0.0f64, |m, q| m.max(q.abs()));
    let s0 = init_from_packet(sigma, q0, p0, &params).unwrap();
    let dt = 1e-3 / params.omega;
    let mut worst = 0.0f64;
    for (&t, &c) in times.iter().zip(&closed) {
        let rk4 = integrate(&s0, t, dt, &params).unwrap().last().unwrap().1.q;
        let mehler = common::mehler_center(q0, p0, sigma, &params, t, 1 << 14, 801, 40.0 * w);
        let spread = [(rk4 - c).abs(), (mehler - c).abs(), (mehler - rk4).abs()];
        worst = worst.max(spread.iter().fold(0.0f64, |m, d| m.max(*d)) / scale);
    }
    worst
}

fn triple_oracle() -> Verdict {
    let mut rng = StdRng::seed_from_u64(20_240_611);
    let draws: Vec<(OscillatorParams, f64, f64, f64)> = (0..20)
        .map(|_| {
            let omega = rng.random_range(0.2..1.5f64);
            let w = rng.random_range(0.5..5.0f64);
            let mass = HBAR / (omega * w * w);
            let delta = rng.random_range(-1.0..1.0f64) * w;
            let q0 = rng.random_range(-3.0..3.0f64) * w;
            let p0 = rng.random_range(-3.0..3.0f64) * HBAR / w;
            let sigma = rng.random_range(0.4..2.5f64) / (2.0 * w * w);
            (OscillatorParams::new(mass, omega, delta, HBAR).unwrap(), q0, p0, sigma)
        })
        .collect();
    let worst = std::thread::scope(|s| {
        let handles: Vec<_> =
            draws.iter().map(|&(p, q0, p0, sigma)| s.spawn(move || triple_oracle_draw(p, q0, p0, sigma))).collect();
        handles.into_iter().map(|h| h.join().unwrap()).fold(0.0f64, f64::max)
    });
    Verdict {
        name: "closed form / canonical RK4 / Mehler quadrature agreement",
        passed: worst <= 1e-5,
        detail: format!("20 draws × 10 times, worst relative disagreement {worst:.3e} (≤ 1e-5)"),
    }
}

fn propagator() -> Verdict {
    let input = TransverseField::from_fn(512, 512.0, |x| {
        Complex64::new((-(x - 12.0) * (x - 12.0) / 900.0).exp(), 0.0) * Complex64::from_polar(1.0, 0.01 * x)
    });
    let m = AbcdMatrix::new(0.8, -3600.0, (0.8 * 0.8 - 1.0) / -3600.0, 0.8);
    let fast = collins_propagate(&input, &m, WAVELENGTH).unwrap();
    let direct = common::collins_quadrature(&input, &m, WAVELENGTH);
    let quad_err =
        fast.values.iter().zip(&direct.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / direct.peak();

    let mut rng = StdRng::seed_from_u64(0x5eed);
    let q0 = Complex64::new(0.0, PI * 400.0 / WAVELENGTH);
    let beam = common::gaussian_beam(4096, 4096.0, q0, WAVELENGTH);
    let mut q_err = 0.0f64;
    for _ in 0..10 {
        let theta = rng.random_range(0.3..2.8f64);
        let b = rng.random_range(500.0..3000.0f64) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let a = rng.random_range(-0.9..0.9f64);
        let d = 2.0 * theta.cos() - a;
        let m = AbcdMatrix::new(a, b, (a * d - 1.0) / b, d);
        let out = collins_propagate(&beam, &m, WAVELENGTH).unwrap();
        let expected = m.transform_q(q0);
        q_err = q_err.max((common::fit_beam_parameter(&out, WAVELENGTH) - expected).norm() / expected.norm());
    }
    Verdict {
        name: "Collins propagator",
        passed: quad_err <= 1e-8 && q_err <= 1e-6,
        detail: format!(
            "vs direct quadrature (N = 512) {quad_err:.3e} of peak (≤ 1e-8); q-law over 10 stable matrices {q_err:.3e} (≤ 1e-6)"
        ),
    }
}

fn threshold_law() -> Verdict {
    let config = CavityConfig::fig2();
    let th = threshold_pump(&config, EigenOptions::default()).unwrap();
    let modulus = round_trip_eigenpair(&config).unwrap().eigenvalue.norm();
    let expected = (0.12131f64 - 0.18).exp();
    let passed = (th.axis_gain - config.round_trip_loss).abs() <= 1e-3 && (modulus - expected).abs() <= 1e-3;
    Verdict {
        name: "threshold law",
        passed,
        detail: format!(
            "|λ| = 1 at g₀ = {:.6} (l = 0.18 ± 1e-3); below threshold |λ| = {modulus:.6} (e^(0.12131-0.18) = {expected:.6} ± 1e-3)",
            th.axis_gain
        ),
    }
}

fn mode_diagnostics() -> Verdict {
    let config = CavityConfig::fig2();
    let p = config.oscillator_params().unwrap();
    let w0 = p.mode_waist();
    let pair = round_trip_eigenpair(&config).unwrap();
    let mode = sample_packet(&fundamental_mode(&p), &pair.mode);
    let adjoint = sample_packet(&fundamental_mode(&OscillatorParams { delta: -p.delta, ..p }), &pair.mode);
    let overlap = normalized_overlap(&pair.mode, &mode).unwrap();
    let k_closed = petermann(p.delta, w0);
    let k_numeric = petermann_numeric(&mode, &adjoint).unwrap();

    // the slope of the drifting centroid is -p₀ = -mΩδ; the emulated particle's velocity is p₀/m
    let b = config.round_trip_matrix().unwrap().b;
    let mut velocity_err = 0.0f64;
    let mut slope_half = 0.0;
    for (dz, steps) in [(b / 10.0, 20), (b / 2.0, 8), (b, 4)] {
        let slope = free_drift_check(&mode, &p, steps, dz).unwrap();
        let velocity = -slope / p.mass;
        velocity_err = velocity_err.max(((velocity - p.omega * p.delta) / (p.omega * p.delta)).abs());
        if dz == b / 2.0 {
            slope_half = slope;
        }
    }
    let drift_ratio = slope_half.abs() / divergence_angle(w0, WAVELENGTH);
    let consistency = ((4.0 * drift_ratio * drift_ratio).exp() - k_closed).abs() / k_closed;
    let iterated_slope = free_drift_check(&pair.mode, &p, 8, b / 2.0).unwrap();
    let iterated_err = ((iterated_slope - expected_free_drift_slope(&p)) / expected_free_drift_slope(&p)).abs();

    let mut untilted = config;
    untilted.gain.offset = 0.0;
    let h = untilted.oscillator_params().unwrap();
    let h_mode = sample_packet(&fundamental_mode(&h), &pair.mode);
    let h_adjoint = sample_packet(&fundamental_mode(&OscillatorParams { delta: -h.delta, ..h }), &pair.mode);
    let h_k = petermann_numeric(&h_mode, &h_adjoint).unwrap();
    let h_drift = free_drift_check(&h_mode, &h, 8, b / 2.0).unwrap();

    let ratio = tilt_ratio(p.delta, w0);
    let headline_differs = (ratio.abs() - 0.075).abs() > 0.0075 || (k_closed - 1.023).abs() > 0.0023;
    let checks = [
        ("overlap", overlap > 0.999),
        ("K by quadrature", (k_numeric - k_closed).abs() <= 1e-6),
        ("free-drift velocity", velocity_err <= 1e-2),
        ("K consistency", consistency <= 1e-2),
        ("untilted K", h.delta == 0.0 && h_k == 1.0 && petermann(h.delta, h.mode_waist()) == 1.0),
        ("untilted drift", h_drift == 0.0),
    ];
    let failing: Vec<&str> = checks.iter().filter(|(_, ok)| !ok).map(|(name, _)| *name).collect();
    Verdict {
        name: "mode diagnostics",
        passed: failing.is_empty(),
        detail: format!(
            "{}overlap {overlap:.7} (> 0.999); K by quadrature {k_numeric:.10} vs exp[(2δ/w₀)²] {k_closed:.10} (≤ 1e-6); \
             free-drift velocity vs Ωδ {velocity_err:.2e} (≤ 1%); K vs exp[4 (drift ratio)²] {consistency:.2e} (≤ 1%); \
             untilted K = {h_k}, drift = {h_drift:e} (exactly 1 and 0); \
             tilt ratio {:.4} and K {k_closed:.4} vs quoted 0.075 and 1.023{} \
             [iterated-mode drift deviates {iterated_err:.2e}]",
            if failing.is_empty() { String::new() } else { format!("failing: {}; ", failing.join(", ")) },
            ratio.abs(),
            if headline_differs { " — DISCREPANCY" } else { "" }
        ),
    }
}

fn conservation() -> Verdict {
    let p = CavityConfig::fig2().oscillator_params().unwrap();
    let s0 = init_from_packet(1.0 / 1600.0, 0.0, 0.0, &p).unwrap();
    let periods = 3.0;
    let traj = integrate(&s0, periods * p.period(), 1e-3 / p.omega, &p).unwrap();
    let purity = (traj.last().unwrap().1.purity() - s0.purity()).abs() / periods;

    let cavity = Cavity::new(CavityConfig::fig2()).unwrap();
    let f = cavity.empty_field().like(|x| Complex64::new((-(x - 30.0) * (x - 30.0) / 1600.0).exp(), 0.0));
    let g = cavity.empty_field().like(|x| Complex64::new(0.0, (-(x + 50.0) * (x + 50.0) / 3600.0).exp() * x / 60.0));
    let (a, b) = (Complex64::new(0.7, -1.3), Complex64::new(-0.2, 0.4));
    let mut combined = f.clone();
    for ((c, fv), gv) in combined.values.iter_mut().zip(&f.values).zip(&g.values) {
        *c = a * fv + b * gv;
    }
    let (mut lf, mut lg) = (f, g);
    cavity.apply_operator(&mut lf).unwrap();
    cavity.apply_operator(&mut lg).unwrap();
    cavity.apply_operator(&mut combined).unwrap();
    let linearity = combined
        .values
        .iter()
        .zip(lf.values.iter().zip(&lg.values))
        .map(|(c, (fv, gv))| (c - (a * fv + b * gv)).norm())
        .fold(0.0, f64::max)
        / combined.peak();

    let q_series = |config: CavityConfig| {
        let run = simulate_pulse(&Cavity::new(config).unwrap(), 60, &[], HBAR).unwrap();
        run.series.window_from(config.post_excitation_start()).map(|i| run.series.q[i].unwrap()).collect::<Vec<_>>()
    };
    let coarse = CavityConfig::fig2();
    let fine = CavityConfig { grid: GridSpec { points: 2 * coarse.grid.points, ..coarse.grid }, ..coarse };
    let grid_change = q_series(coarse).iter().zip(q_series(fine)).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);

    Verdict {
        name: "conservation",
        passed: purity < 1e-9 && linearity < 1e-13 && grid_change < 1e-4,
        detail: format!(
            "purity drift {purity:.2e} per period (< 1e-9); linearity defect {linearity:.2e} of peak (machine precision, < 1e-13); \
             grid doubling moves q(n) by {grid_change:.2e} λ (< 1e-4)"
        ),
    }
}

fn main() -> ExitCode {
    let criteria: [fn() -> Verdict; 7] =
        [reference_trajectory, anharmonicity, triple_oracle, propagator, threshold_law, mode_diagnostics, conservation];
    let mut failed = 0;
    for criterion in criteria {
        let v = criterion();
        v.print();
        failed += usize::from(!v.passed);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
