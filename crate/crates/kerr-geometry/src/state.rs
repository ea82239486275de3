use std::f64::consts::PI;

use crate::{GeometryError, KerrParams};

/// A point `(r, θ, φ, ξ, α, β)` of T*X; `(ξ, α, β)` are conjugate to `(r, θ, φ)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PhaseState {
    pub r: f64,
    pub theta: f64,
    pub phi: f64,
    pub xi: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl PhaseState {
    pub fn new(r: f64, theta: f64, phi: f64, xi: f64, alpha: f64, beta: f64) -> Self {
        Self { r, theta, phi, xi, alpha, beta }
    }

    /// Ordering is positions first: `[r, θ, φ, ξ, α, β]`.
    pub fn to_array(&self) -> [f64; 6] {
        [self.r, self.theta, self.phi, self.xi, self.alpha, self.beta]
    }

    pub fn from_slice(x: &[f64]) -> Self {
        Self::new(x[0], x[1], x[2], x[3], x[4], x[5])
    }
}

/// Values conserved by the Kerr flow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservedTriple {
    pub p_value: f64,
    pub beta_value: f64,
    pub carter: f64,
}

/// Validity region of the Boyer–Lindquist chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chart {
    pub theta_min: f64,
    pub r_margin: f64,
}

impl Default for Chart {
    fn default() -> Self {
        Self { theta_min: 0.05, r_margin: 1e-6 }
    }
}

impl Chart {
    pub fn check(&self, s: &PhaseState, k: &KerrParams) -> Result<(), GeometryError> {
        let r_plus = k.horizon_radius();
        if !(s.r > r_plus + self.r_margin) {
            return Err(GeometryError::InsideHorizon { r: s.r, r_plus });
        }
        if !(s.theta >= self.theta_min && s.theta <= PI - self.theta_min) {
            return Err(GeometryError::PolarChart { theta: s.theta, min: self.theta_min });
        }
        Ok(())
    }

    pub fn contains(&self, s: &PhaseState, k: &KerrParams) -> bool {
        self.check(s, k).is_ok()
    }
}
