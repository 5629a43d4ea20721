use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex field sampled on a uniform grid `x_j = origin + j·dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct TransverseField {
    pub origin: f64,
    pub dx: f64,
    pub values: Vec<Complex64>,
    pub round_trip: u64,
}

impl TransverseField {
    /// Zero field on `points` samples spanning `width`, centered on the axis
    /// (`x = 0` falls on sample `points/2`).
    pub fn zeros(points: usize, width: f64) -> Self {
        let dx = width / points as f64;
        Self {
            origin: -((points / 2) as f64) * dx,
            dx,
            values: vec![Complex64::new(0.0, 0.0); points],
            round_trip: 0,
        }
    }

    pub fn from_fn(points: usize, width: f64, f: impl Fn(f64) -> Complex64) -> Self {
        let mut field = Self::zeros(points, width);
        for (j, v) in field.values.iter_mut().enumerate() {
            *v = f(field.origin + j as f64 * field.dx);
        }
        field
    }

    /// Same grid, values from `f`.
    pub fn like(&self, f: impl Fn(f64) -> Complex64) -> Self {
        Self { values: self.positions().map(f).collect(), ..self.clone() }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn width(&self) -> f64 {
        self.dx * self.len() as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.origin + j as f64 * self.dx
    }

    pub fn positions(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len()).map(|j| self.x(j))
    }

    pub fn same_grid(&self, other: &Self) -> bool {
        self.len() == other.len()
            && (self.dx - other.dx).abs() <= 1e-12 * self.dx
            && (self.origin - other.origin).abs() <= 1e-12 * self.width()
    }

    pub fn ensure_same_grid(&self, other: &Self) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!(
                "({} pts, dx {}) vs ({} pts, dx {})",
                self.len(),
                self.dx,
                other.len(),
                other.dx
            )))
        }
    }

    pub fn peak(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Largest magnitude among the outermost 1/64 of the samples on either
    /// side, relative to the peak. Zero for an identically zero field.
    pub fn edge_ratio(&self) -> f64 {
        let peak = self.peak();
        if peak == 0.0 {
            return 0.0;
        }
        let band = (self.len() / 64).max(1);
        let n = self.len();
        let edge = self.values[..band]
            .iter()
            .chain(&self.values[n - band..])
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        edge / peak
    }

    /// `∫ f* g dx` on the common grid.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.ensure_same_grid(other)?;
        let sum: Complex64 = self.values.iter().zip(&other.values).map(|(a, b)| a.conj() * b).sum();
        Ok(sum * self.dx)
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.values.iter_mut().for_each(|v| *v *= factor);
    }

    /// Rescales to unit power; leaves a zero field untouched.
    pub fn normalize(&mut self) -> f64 {
        let norm = (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dx).sqrt();
        if norm > 0.0 {
            self.scale(Complex64::new(1.0 / norm, 0.0));
        }
        norm
    }
}
