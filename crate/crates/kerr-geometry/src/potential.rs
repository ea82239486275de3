use crate::KerrParams;

/// Derivatives of `q(r, β) = (a²β² + 4Marβ + (r² + a²)²) / Δ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialTerms {
    pub q: f64,
    pub q_r: f64,
    pub q_rr: f64,
    pub q_b: f64,
    pub q_bb: f64,
    pub q_rb: f64,
}

impl RadialTerms {
    pub fn new(k: &KerrParams, r: f64, beta: f64) -> Self {
        let m = k.mass();
        let a = k.spin();
        let s = r * r + a * a;
        let n = a * a * beta * beta + 4.0 * m * a * r * beta + s * s;
        let n_r = 4.0 * m * a * beta + 4.0 * r * s;
        let n_rr = 12.0 * r * r + 4.0 * a * a;
        let n_b = 2.0 * a * a * beta + 4.0 * m * a * r;
        let n_bb = 2.0 * a * a;
        let n_rb = 4.0 * m * a;
        let d = k.delta(r);
        let d1 = k.delta_prime(r);
        let q = n / d;
        let q_r = (n_r - q * d1) / d;
        let q_rr = (n_rr - 2.0 * q_r * d1 - 2.0 * q) / d;
        let q_b = n_b / d;
        let q_bb = n_bb / d;
        let q_rb = (n_rb - q_b * d1) / d;
        Self { q, q_r, q_rr, q_b, q_bb, q_rb }
    }
}

/// The radial potential `v_β(r) = 2aβ − q(r, β)`, so that `p = 𝒦 + Δξ² + v_β(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPotential {
    pub params: KerrParams,
    pub beta: f64,
}

impl RadialPotential {
    pub fn new(params: KerrParams, beta: f64) -> Self {
        Self { params, beta }
    }

    pub fn value(&self, r: f64) -> f64 {
        2.0 * self.params.spin() * self.beta - RadialTerms::new(&self.params, r, self.beta).q
    }

    pub fn d1(&self, r: f64) -> f64 {
        -RadialTerms::new(&self.params, r, self.beta).q_r
    }

    pub fn d2(&self, r: f64) -> f64 {
        -RadialTerms::new(&self.params, r, self.beta).q_rr
    }

    /// ∂_β v_β(r).
    pub fn d_beta(&self, r: f64) -> f64 {
        2.0 * self.params.spin() - RadialTerms::new(&self.params, r, self.beta).q_b
    }

    /// ∂_β ∂_r v_β(r).
    pub fn d_beta_r(&self, r: f64) -> f64 {
        -RadialTerms::new(&self.params, r, self.beta).q_rb
    }

    /// `B(r) = −v_β′(r)/2`, the ξ-forcing of the reduced flow.
    pub fn b(&self, r: f64) -> f64 {
        -0.5 * self.d1(r)
    }

    /// The factored form `(aβ(M−r) + rΔ + M(a²−r²))(aβ + a² + r²)/Δ²`.
    pub fn b_factored(&self, r: f64) -> f64 {
        let m = self.params.mass();
        let a = self.params.spin();
        let b = self.beta;
        let d = self.params.delta(r);
        (a * b * (m - r) + r * d + m * (a * a - r * r)) * (a * b + a * a + r * r) / (d * d)
    }

    pub fn b_prime(&self, r: f64) -> f64 {
        -0.5 * self.d2(r)
    }
}
