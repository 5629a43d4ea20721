use serde::{Deserialize, Serialize};

/// Gain sheet produced by a Gaussian pump, `g(x) = g_p exp[-2(x - s)²/w_p²]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainProfile {
    pub peak: f64,
    pub pump_waist: f64,
    pub offset: f64,
}

impl GainProfile {
    pub fn gain_at(&self, x: f64) -> f64 {
        let u = (x - self.offset) / self.pump_waist;
        self.peak * (-2.0 * u * u).exp()
    }

    /// `(g₀, α) = (g(0), g'(0))`.
    pub fn linearize(&self) -> (f64, f64) {
        let g0 = self.gain_at(0.0);
        (g0, 4.0 * self.offset / (self.pump_waist * self.pump_waist) * g0)
    }

    /// `g''(0)`; vanishes at `s = w_p/2`.
    pub fn curvature_at_axis(&self) -> f64 {
        let w2 = self.pump_waist * self.pump_waist;
        let s = self.offset;
        self.gain_at(0.0) * 4.0 / w2 * (4.0 * s * s / w2 - 1.0)
    }
}
