use serde::Serialize;

/// Radial cutoff: `1` for `ρ ≤ inner`, `0` for `ρ ≥ outer`, quintic smoothstep between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cutoff {
    pub inner: f64,
    pub outer: f64,
}

/// `6s⁵ − 15s⁴ + 10s³` clamped to `[0, 1]`, with derivative.
pub(crate) fn smoothstep(s: f64) -> (f64, f64) {
    if s <= 0.0 {
        (0.0, 0.0)
    } else if s >= 1.0 {
        (1.0, 0.0)
    } else {
        let s2 = s * s;
        (s2 * s * (10.0 - 15.0 * s + 6.0 * s2), 30.0 * s2 * (1.0 - s) * (1.0 - s))
    }
}

impl Cutoff {
    pub fn new(inner: f64, outer: f64) -> Self {
        Self { inner, outer }
    }

    /// Value and `d/dρ`.
    pub fn eval(&self, rho: f64) -> (f64, f64) {
        let w = self.outer - self.inner;
        let (s, ds) = smoothstep((self.outer - rho) / w);
        (s, -ds / w)
    }
}
