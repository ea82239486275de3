use crate::GeometryError;

/// Mass `M` and spin `a` of a subextremal Kerr black hole.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrParams {
    mass: f64,
    spin: f64,
}

impl KerrParams {
    pub fn new(mass: f64, spin: f64) -> Result<Self, GeometryError> {
        if !(mass.is_finite() && spin.is_finite() && mass > 0.0 && spin >= 0.0 && spin < mass) {
            return Err(GeometryError::InvalidParams { mass, spin });
        }
        Ok(Self { mass, spin })
    }

    pub fn schwarzschild(mass: f64) -> Self {
        Self::new(mass, 0.0).expect("positive mass")
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn spin(&self) -> f64 {
        self.spin
    }

    /// Δ = r² − 2Mr + a².
    pub fn delta(&self, r: f64) -> f64 {
        r * r - 2.0 * self.mass * r + self.spin * self.spin
    }

    pub fn delta_prime(&self, r: f64) -> f64 {
        2.0 * (r - self.mass)
    }

    /// ρ² = r² + a² cos²θ.
    pub fn rho2(&self, r: f64, theta: f64) -> f64 {
        let c = theta.cos();
        r * r + self.spin * self.spin * c * c
    }

    /// Outer horizon r₊ = M + √(M² − a²).
    pub fn horizon_radius(&self) -> f64 {
        self.mass + (self.mass * self.mass - self.spin * self.spin).sqrt()
    }

    /// Inner horizon r₋ = M − √(M² − a²).
    pub fn inner_horizon_radius(&self) -> f64 {
        let d = (self.mass * self.mass - self.spin * self.spin).sqrt();
        // a² / r₊ avoids cancellation when a is small.
        self.spin * self.spin / (self.mass + d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_extremal_and_negative() {
        assert!(KerrParams::new(1.0, 1.0).is_err());
        assert!(KerrParams::new(1.0, -0.1).is_err());
        assert!(KerrParams::new(0.0, 0.0).is_err());
        assert!(KerrParams::new(1.0, 0.999).is_ok());
    }

    #[test]
    fn delta_vanishes_at_both_horizons() {
        for &(m, a) in &[(1.0, 0.0), (1.0, 0.3), (2.0, 1.7), (1.0, 0.999)] {
            let k = KerrParams::new(m, a).unwrap();
            let rp = k.horizon_radius();
            let rm = k.inner_horizon_radius();
            assert!(k.delta(rp).abs() <= 4.0 * f64::EPSILON * rp * rp);
            assert!(k.delta(rm).abs() <= 4.0 * f64::EPSILON * rp * rp);
            assert!(rp > m);
        }
    }
}
