//! Collins (generalized Fresnel) propagation through an ABCD system.
//!
//! The kernel
//!
//! ```text
//! K(x, ξ) = √(i/λB) exp[-iπ/(λB) (D x² + A ξ² - 2 x ξ)]
//! ```
//!
//! factors as an input chirp `exp[-iπ(A-1)ξ²/λB]`, free propagation over the
//! effective distance `B` and an output chirp `exp[-iπ(D-1)x²/λB]`. Free
//! propagation is applied spectrally with the transfer function
//! `exp(iπλB f²)`, so the output lands on the input grid.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::{AbcdMatrix, TransverseField};
use crate::error::{Error, Result};

/// Precomputed chirps and transfer function for one grid and one matrix.
#[derive(Clone)]
pub struct CollinsPropagator {
    matrix: AbcdMatrix,
    origin: f64,
    dx: f64,
    input_chirp: Vec<Complex64>,
    output_chirp: Vec<Complex64>,
    transfer: Vec<Complex64>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for CollinsPropagator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CollinsPropagator")
            .field("matrix", &self.matrix)
            .field("points", &self.transfer.len())
            .field("dx", &self.dx)
            .finish()
    }
}

fn chirp(coefficient: f64, x: f64) -> Complex64 {
    Complex64::from_polar(1.0, -PI * coefficient * x * x)
}

impl CollinsPropagator {
    /// Builds the propagator for fields shaped like `grid`.
    pub fn new(grid: &TransverseField, matrix: AbcdMatrix, wavelength: f64) -> Result<Self> {
        if matrix.b == 0.0 || !matrix.b.is_finite() {
            return Err(Error::ImagingCondition);
        }
        let n = grid.len();
        if n < 2 {
            return Err(Error::GridMismatch(format!("grid needs at least 2 points, got {n}")));
        }
        let lb = wavelength * matrix.b;
        let input_chirp = grid.positions().map(|x| chirp((matrix.a - 1.0) / lb, x)).collect();
        let output_chirp = grid.positions().map(|x| chirp((matrix.d - 1.0) / lb, x)).collect();
        let df = 1.0 / (n as f64 * grid.dx);
        let transfer = (0..n)
            .map(|k| {
                let f = if k < n.div_ceil(2) { k as f64 } else { k as f64 - n as f64 } * df;
                Complex64::from_polar(1.0, PI * lb * f * f)
            })
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Self {
            matrix,
            origin: grid.origin,
            dx: grid.dx,
            input_chirp,
            output_chirp,
            transfer,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        })
    }

    pub fn matrix(&self) -> AbcdMatrix {
        self.matrix
    }

    fn check_grid(&self, field: &TransverseField) -> Result<()> {
        let n = self.transfer.len();
        if field.len() != n
            || (field.dx - self.dx).abs() > 1e-12 * self.dx
            || (field.origin - self.origin).abs() > 1e-12 * self.dx * n as f64
        {
            return Err(Error::GridMismatch(format!(
                "propagator built for {n} pts at dx {}, field has {} pts at dx {}",
                self.dx,
                field.len(),
                field.dx
            )));
        }
        Ok(())
    }

    fn free(&self, values: &mut [Complex64], conjugate: bool) {
        let n = values.len();
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.forward.get_inplace_scratch_len()];
        self.forward.process_with_scratch(values, &mut scratch);
        let norm = 1.0 / n as f64;
        for (v, h) in values.iter_mut().zip(&self.transfer) {
            *v *= if conjugate { h.conj() } else { *h } * norm;
        }
        scratch.resize(self.inverse.get_inplace_scratch_len(), Complex64::new(0.0, 0.0));
        self.inverse.process_with_scratch(values, &mut scratch);
    }

    /// Applies `K̂` in place.
    pub fn apply(&self, field: &mut TransverseField) -> Result<()> {
        self.check_grid(field)?;
        for (v, c) in field.values.iter_mut().zip(&self.input_chirp) {
            *v *= c;
        }
        self.free(&mut field.values, false);
        for (v, c) in field.values.iter_mut().zip(&self.output_chirp) {
            *v *= c;
        }
        Ok(())
    }

    /// Applies the Hermitian adjoint `K̂†` in place.
    pub fn apply_adjoint(&self, field: &mut TransverseField) -> Result<()> {
        self.check_grid(field)?;
        for (v, c) in field.values.iter_mut().zip(&self.output_chirp) {
            *v *= c.conj();
        }
        self.free(&mut field.values, true);
        for (v, c) in field.values.iter_mut().zip(&self.input_chirp) {
            *v *= c.conj();
        }
        Ok(())
    }
}

/// One-shot propagation; build a [`CollinsPropagator`] when propagating
/// repeatedly through the same system.
pub fn collins_propagate(
    field: &TransverseField,
    matrix: &AbcdMatrix,
    wavelength: f64,
) -> Result<TransverseField> {
    let propagator = CollinsPropagator::new(field, *matrix, wavelength)?;
    let mut out = field.clone();
    propagator.apply(&mut out)?;
    Ok(out)
}
