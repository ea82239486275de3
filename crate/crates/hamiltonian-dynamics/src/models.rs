//! Concrete symbols: full Kerr, its conformal rescaling, the reduced radial
//! system, and one-dimensional barrier models.

use kerr_geometry::{
    carter, symbol_p_gradient, symbol_p_hessian, Chart, KerrParams, PhaseState, RadialPotential,
};

/// An evaluable symbol on `R^d`, `d` even, with positions first.
pub trait HamiltonianModel: Send + Sync {
    fn dimension(&self) -> usize;
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64], g: &mut [f64]);
    /// Row-major `d × d`.
    fn hessian(&self, x: &[f64], h: &mut [f64]);

    fn in_chart(&self, _x: &[f64]) -> bool {
        true
    }

    fn conserved_names(&self) -> Vec<&'static str> {
        vec!["p"]
    }

    fn conserved(&self, x: &[f64]) -> Vec<f64> {
        vec![self.value(x)]
    }

    /// The Hamilton field `(∂p/∂momenta, −∂p/∂positions)`.
    fn field(&self, x: &[f64], out: &mut [f64]) {
        let d = self.dimension();
        let n = d / 2;
        let mut g = vec![0.0; d];
        self.gradient(x, &mut g);
        for i in 0..n {
            out[i] = g[n + i];
            out[n + i] = -g[i];
        }
    }
}

impl<T: HamiltonianModel + ?Sized> HamiltonianModel for &T {
    fn dimension(&self) -> usize {
        (**self).dimension()
    }
    fn value(&self, x: &[f64]) -> f64 {
        (**self).value(x)
    }
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        (**self).gradient(x, g)
    }
    fn hessian(&self, x: &[f64], h: &mut [f64]) {
        (**self).hessian(x, h)
    }
    fn in_chart(&self, x: &[f64]) -> bool {
        (**self).in_chart(x)
    }
    fn conserved_names(&self) -> Vec<&'static str> {
        (**self).conserved_names()
    }
    fn conserved(&self, x: &[f64]) -> Vec<f64> {
        (**self).conserved(x)
    }
}

/// The full Kerr symbol `p` on the six-dimensional phase space.
#[derive(Debug, Clone, Copy)]
pub struct KerrModel {
    pub params: KerrParams,
    pub chart: Chart,
}

impl KerrModel {
    pub fn new(params: KerrParams) -> Self {
        Self { params, chart: Chart::default() }
    }
}

fn kerr_value(x: &[f64], k: &KerrParams) -> f64 {
    let s = PhaseState::from_slice(x);
    let sn = s.theta.sin();
    let a = k.spin();
    let v = RadialPotential::new(*k, s.beta).value(s.r);
    k.delta(s.r) * s.xi * s.xi + s.alpha * s.alpha + s.beta * s.beta / (sn * sn) + a * a * sn * sn
        - 2.0 * a * s.beta
        + v
}

impl HamiltonianModel for KerrModel {
    fn dimension(&self) -> usize {
        6
    }
    fn value(&self, x: &[f64]) -> f64 {
        kerr_value(x, &self.params)
    }
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        g.copy_from_slice(&symbol_p_gradient(&PhaseState::from_slice(x), &self.params));
    }
    fn hessian(&self, x: &[f64], h: &mut [f64]) {
        let m = symbol_p_hessian(&PhaseState::from_slice(x), &self.params);
        for i in 0..6 {
            h[6 * i..6 * i + 6].copy_from_slice(&m[i]);
        }
    }
    fn in_chart(&self, x: &[f64]) -> bool {
        self.chart.contains(&PhaseState::from_slice(x), &self.params)
    }
    fn conserved_names(&self) -> Vec<&'static str> {
        vec!["p", "beta", "carter"]
    }
    fn conserved(&self, x: &[f64]) -> Vec<f64> {
        let s = PhaseState::from_slice(x);
        vec![self.value(x), s.beta, carter(&s, &self.params)]
    }
}

/// The conformally rescaled symbol `(Δ/r⁴)·p`, principal symbol of the
/// operator `(Δ/r⁴)P̃`. Its orbits are asymptotically Euclidean at large `r`
/// and share the unparametrized null orbits of `p`.
#[derive(Debug, Clone, Copy)]
pub struct RescaledKerrModel {
    pub params: KerrParams,
    pub chart: Chart,
}

impl RescaledKerrModel {
    pub fn new(params: KerrParams) -> Self {
        Self { params, chart: Chart::default() }
    }

    /// `f = Δ/r⁴` and its first two `r`-derivatives.
    pub fn conformal_factor(&self, r: f64) -> (f64, f64, f64) {
        let d = self.params.delta(r);
        let d1 = self.params.delta_prime(r);
        let r4 = r.powi(4);
        let f = d / r4;
        let f1 = d1 / r4 - 4.0 * d / (r4 * r);
        let f2 = 2.0 / r4 - 8.0 * d1 / (r4 * r) + 20.0 * d / (r4 * r * r);
        (f, f1, f2)
    }
}

impl HamiltonianModel for RescaledKerrModel {
    fn dimension(&self) -> usize {
        6
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.conformal_factor(x[0]).0 * kerr_value(x, &self.params)
    }
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        let (f, f1, _) = self.conformal_factor(x[0]);
        let p = kerr_value(x, &self.params);
        let gp = symbol_p_gradient(&PhaseState::from_slice(x), &self.params);
        for i in 0..6 {
            g[i] = f * gp[i];
        }
        g[0] += f1 * p;
    }
    fn hessian(&self, x: &[f64], h: &mut [f64]) {
        let (f, f1, f2) = self.conformal_factor(x[0]);
        let s = PhaseState::from_slice(x);
        let p = kerr_value(x, &self.params);
        let gp = symbol_p_gradient(&s, &self.params);
        let hp = symbol_p_hessian(&s, &self.params);
        for i in 0..6 {
            for j in 0..6 {
                h[6 * i + j] = f * hp[i][j];
            }
            h[6 * i] += f1 * gp[i];
            h[i] += f1 * gp[i];
        }
        h[0] += f2 * p;
    }
    fn in_chart(&self, x: &[f64]) -> bool {
        self.chart.contains(&PhaseState::from_slice(x), &self.params)
    }
    fn conserved_names(&self) -> Vec<&'static str> {
        vec!["p", "beta", "carter"]
    }
    fn conserved(&self, x: &[f64]) -> Vec<f64> {
        let s = PhaseState::from_slice(x);
        vec![self.value(x), s.beta, carter(&s, &self.params)]
    }
}

/// The radial system at fixed `β`: `p_β(r, ξ) = Δξ² + v_β(r)`, which equals
/// `p − 𝒦` and depends on `(r, ξ)` only.
#[derive(Debug, Clone, Copy)]
pub struct ReducedKerr {
    pub params: KerrParams,
    pub beta: f64,
    pub r_margin: f64,
}

impl ReducedKerr {
    pub fn new(params: KerrParams, beta: f64) -> Self {
        Self { params, beta, r_margin: 1e-6 }
    }

    pub fn potential(&self) -> RadialPotential {
        RadialPotential::new(self.params, self.beta)
    }
}

impl HamiltonianModel for ReducedKerr {
    fn dimension(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.params.delta(x[0]) * x[1] * x[1] + self.potential().value(x[0])
    }
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        g[0] = self.params.delta_prime(x[0]) * x[1] * x[1] + self.potential().d1(x[0]);
        g[1] = 2.0 * self.params.delta(x[0]) * x[1];
    }
    fn hessian(&self, x: &[f64], h: &mut [f64]) {
        h[0] = 2.0 * x[1] * x[1] + self.potential().d2(x[0]);
        h[1] = 2.0 * self.params.delta_prime(x[0]) * x[1];
        h[2] = h[1];
        h[3] = 2.0 * self.params.delta(x[0]);
    }
    fn in_chart(&self, x: &[f64]) -> bool {
        x[0] > self.params.horizon_radius() + self.r_margin
    }
}

/// The quadratic barrier `p = ξ² − x²`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ToyBarrier;

impl HamiltonianModel for ToyBarrier {
    fn dimension(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> f64 {
        x[1] * x[1] - x[0] * x[0]
    }
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        g[0] = -2.0 * x[0];
        g[1] = 2.0 * x[1];
    }
    fn hessian(&self, _x: &[f64], h: &mut [f64]) {
        h.copy_from_slice(&[-2.0, 0.0, 0.0, 2.0]);
    }
}

/// `p = ξ² + sech²x − 1`, a smooth barrier with top at the origin.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sech2Barrier;

impl HamiltonianModel for Sech2Barrier {
    fn dimension(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> f64 {
        let s = 1.0 / x[0].cosh();
        x[1] * x[1] + s * s - 1.0
    }
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        let s = 1.0 / x[0].cosh();
        g[0] = -2.0 * s * s * x[0].tanh();
        g[1] = 2.0 * x[1];
    }
    fn hessian(&self, x: &[f64], h: &mut [f64]) {
        let s2 = 1.0 / x[0].cosh().powi(2);
        let t = x[0].tanh();
        h.copy_from_slice(&[s2 * (4.0 * t * t - 2.0 * s2), 0.0, 0.0, 2.0]);
    }
}

/// Effective radial Schwarzschild symbol
/// `p(r, ξ) = (Δ²/r⁴)ξ² + k·Δ/r⁴ − 1`, `Δ = r² − 2Mr`.
#[derive(Debug, Clone, Copy)]
pub struct SchwarzschildRadial {
    pub mass: f64,
    pub k_ang: f64,
}

impl SchwarzschildRadial {
    /// `(m, m′, m″)` for the kinetic weight `m = Δ²/r⁴ = (1 − 2M/r)²`.
    pub fn mass_weight(&self, r: f64) -> (f64, f64, f64) {
        let u = 1.0 - 2.0 * self.mass / r;
        let u1 = 2.0 * self.mass / (r * r);
        let u2 = -4.0 * self.mass / (r * r * r);
        (u * u, 2.0 * u * u1, 2.0 * (u1 * u1 + u * u2))
    }

    /// `(V, V′, V″)` for `V = k·Δ/r⁴ − 1 = k(r⁻² − 2M r⁻³) − 1`.
    pub fn potential(&self, r: f64) -> (f64, f64, f64) {
        let m = self.mass;
        let k = self.k_ang;
        (
            k * (r.powi(-2) - 2.0 * m * r.powi(-3)) - 1.0,
            k * (-2.0 * r.powi(-3) + 6.0 * m * r.powi(-4)),
            k * (6.0 * r.powi(-4) - 24.0 * m * r.powi(-5)),
        )
    }
}

impl HamiltonianModel for SchwarzschildRadial {
    fn dimension(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.mass_weight(x[0]).0 * x[1] * x[1] + self.potential(x[0]).0
    }
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        let (m, m1, _) = self.mass_weight(x[0]);
        g[0] = m1 * x[1] * x[1] + self.potential(x[0]).1;
        g[1] = 2.0 * m * x[1];
    }
    fn hessian(&self, x: &[f64], h: &mut [f64]) {
        let (m, m1, m2) = self.mass_weight(x[0]);
        h[0] = m2 * x[1] * x[1] + self.potential(x[0]).2;
        h[1] = 2.0 * m1 * x[1];
        h[2] = h[1];
        h[3] = 2.0 * m;
    }
    fn in_chart(&self, x: &[f64]) -> bool {
        x[0] > 2.0 * self.mass * (1.0 + 1e-9)
    }
}
