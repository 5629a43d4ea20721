use std::ops::Mul;

use serde::Serialize;

use crate::error::{check, Error, Result};

/// Paraxial ray-transfer matrix. `B` is a length, `C` an inverse length.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbcdMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl AbcdMatrix {
    pub const IDENTITY: Self = Self { a: 1.0, b: 0.0, c: 0.0, d: 1.0 };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self { a, b, c, d }
    }

    pub fn free_space(distance: f64) -> Self {
        Self { a: 1.0, b: distance, c: 0.0, d: 1.0 }
    }

    /// Thin phase element with `C = power`.
    pub fn thin_element(power: f64) -> Self {
        Self { a: 1.0, b: 0.0, c: power, d: 1.0 }
    }

    pub fn determinant(&self) -> f64 {
        self.a * self.d - self.b * self.c
    }

    pub fn is_unimodular(&self, tolerance: f64) -> bool {
        (self.determinant() - 1.0).abs() <= tolerance
    }

    pub fn half_trace(&self) -> f64 {
        0.5 * (self.a + self.d)
    }

    /// Gaussian-beam parameter law `q' = (Aq + B)/(Cq + D)`.
    pub fn transform_q(&self, q: num_complex::Complex64) -> num_complex::Complex64 {
        (q * self.a + self.b) / (q * self.c + self.d)
    }
}

impl Mul for AbcdMatrix {
    type Output = Self;

    /// `self * rhs` applies `rhs` first.
    fn mul(self, r: Self) -> Self {
        Self {
            a: self.a * r.a + self.b * r.c,
            b: self.a * r.b + self.b * r.d,
            c: self.c * r.a + self.d * r.c,
            d: self.c * r.b + self.d * r.d,
        }
    }
}

/// Round trip of the two-lens flat-mirror resonator, referred to the flat
/// mirror carrying the gain sheet. Independent of the Fourier lens `f₁`.
pub fn round_trip_matrix_fig1b(f: f64, length: f64) -> Result<AbcdMatrix> {
    check(f.is_finite() && f > 0.0, "f", || format!("must be positive, got {f}"))?;
    check(length.is_finite() && length > 0.0, "length", || {
        format!("must be positive, got {length}")
    })?;
    let a = 2.0 * length / f - 1.0;
    Ok(AbcdMatrix { a, b: 2.0 * length * (length / f - 1.0), c: 2.0 / f, d: a })
}

/// `θ = arccos((A + D)/2)`, the Gouy phase per round trip of a stable cavity.
pub fn stability_angle(m: &AbcdMatrix) -> Result<f64> {
    let half = m.half_trace();
    if !(half.abs() < 1.0) {
        return Err(Error::UnstableCavity(half.abs()));
    }
    Ok(half.acos())
}
