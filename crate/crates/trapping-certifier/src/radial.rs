//! Symbols of the separated form `p = 𝒦(θ, α, β) + R(r, ξ, β)`.

use hamiltonian_dynamics::HamiltonianModel;
use kerr_geometry::{Chart, KerrParams, PhaseState, RadialPotential, RadialTerms};

/// Value, gradient and Hessian of a radial symbol in the variables `(r, ξ, β)`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RadialJet {
    pub value: f64,
    pub grad: [f64; 3],
    pub hess: [[f64; 3]; 3],
}

impl std::ops::AddAssign for RadialJet {
    fn add_assign(&mut self, o: Self) {
        self.value += o.value;
        for i in 0..3 {
            self.grad[i] += o.grad[i];
            for j in 0..3 {
                self.hess[i][j] += o.hess[i][j];
            }
        }
    }
}

pub trait RadialSymbol: Send + Sync {
    fn params(&self) -> &KerrParams;
    fn jet(&self, r: f64, xi: f64, beta: f64) -> RadialJet;
}

/// The Kerr radial part `R = Δξ² + v_β(r)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KerrRadial {
    pub params: KerrParams,
}

impl RadialSymbol for KerrRadial {
    fn params(&self) -> &KerrParams {
        &self.params
    }

    fn jet(&self, r: f64, xi: f64, beta: f64) -> RadialJet {
        let k = &self.params;
        let a = k.spin();
        let t = RadialTerms::new(k, r, beta);
        let d = k.delta(r);
        let d1 = k.delta_prime(r);
        let v = RadialPotential::new(*k, beta);
        let mut hess = [[0.0; 3]; 3];
        hess[0][0] = 2.0 * xi * xi - t.q_rr;
        hess[0][1] = 2.0 * d1 * xi;
        hess[0][2] = -t.q_rb;
        hess[1][1] = 2.0 * d;
        hess[2][2] = -t.q_bb;
        hess[1][0] = hess[0][1];
        hess[2][0] = hess[0][2];
        RadialJet {
            value: d * xi * xi + v.value(r),
            grad: [d1 * xi * xi - t.q_r, 2.0 * d * xi, 2.0 * a - t.q_b],
            hess,
        }
    }
}

impl<T: RadialSymbol + ?Sized> RadialSymbol for &T {
    fn params(&self) -> &KerrParams {
        (**self).params()
    }
    fn jet(&self, r: f64, xi: f64, beta: f64) -> RadialJet {
        (**self).jet(r, xi, beta)
    }
}

/// `𝒦 = α² + (a sinθ − β/sinθ)²` with gradient and Hessian in `(θ, α, β)`.
fn carter_jet(a: f64, theta: f64, alpha: f64, beta: f64) -> (f64, [f64; 3], [[f64; 3]; 3]) {
    let (s, c) = theta.sin_cos();
    let w = a * s - beta / s;
    let w_t = c * (a + beta / (s * s));
    let w_tt = -a * s - beta * (s * s + 2.0 * c * c) / (s * s * s);
    let w_b = -1.0 / s;
    let w_tb = c / (s * s);
    let value = alpha * alpha + w * w;
    let grad = [2.0 * w * w_t, 2.0 * alpha, 2.0 * w * w_b];
    let mut h = [[0.0; 3]; 3];
    h[0][0] = 2.0 * (w_t * w_t + w * w_tt);
    h[0][2] = 2.0 * (w_b * w_t + w * w_tb);
    h[2][0] = h[0][2];
    h[1][1] = 2.0;
    h[2][2] = 2.0 * w_b * w_b;
    (value, grad, h)
}

/// Six-dimensional model `p = 𝒦 + R` on `(r, θ, φ, ξ, α, β)`.
#[derive(Debug, Clone, Copy)]
pub struct SeparableModel<R> {
    pub radial: R,
    pub chart: Chart,
}

impl<R: RadialSymbol> SeparableModel<R> {
    pub fn new(radial: R) -> Self {
        Self { radial, chart: Chart::default() }
    }
}

// index maps into the 6D ordering
const RAD: [usize; 3] = [0, 3, 5];
const ANG: [usize; 3] = [1, 4, 5];

impl<R: RadialSymbol> HamiltonianModel for SeparableModel<R> {
    fn dimension(&self) -> usize {
        6
    }
    fn value(&self, x: &[f64]) -> f64 {
        let a = self.radial.params().spin();
        carter_jet(a, x[1], x[4], x[5]).0 + self.radial.jet(x[0], x[3], x[5]).value
    }
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        let a = self.radial.params().spin();
        let (_, cg, _) = carter_jet(a, x[1], x[4], x[5]);
        let rj = self.radial.jet(x[0], x[3], x[5]);
        g.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..3 {
            g[ANG[i]] += cg[i];
            g[RAD[i]] += rj.grad[i];
        }
    }
    fn hessian(&self, x: &[f64], h: &mut [f64]) {
        let a = self.radial.params().spin();
        let (_, _, ch) = carter_jet(a, x[1], x[4], x[5]);
        let rj = self.radial.jet(x[0], x[3], x[5]);
        h.iter_mut().for_each(|v| *v = 0.0);
        for i in 0..3 {
            for j in 0..3 {
                h[6 * ANG[i] + ANG[j]] += ch[i][j];
                h[6 * RAD[i] + RAD[j]] += rj.hess[i][j];
            }
        }
    }
    fn in_chart(&self, x: &[f64]) -> bool {
        self.chart.contains(&PhaseState::from_slice(x), self.radial.params())
    }
    fn conserved_names(&self) -> Vec<&'static str> {
        vec!["p", "beta", "carter"]
    }
    fn conserved(&self, x: &[f64]) -> Vec<f64> {
        let a = self.radial.params().spin();
        vec![self.value(x), x[5], carter_jet(a, x[1], x[4], x[5]).0]
    }
}

/// The radial system at fixed `β`, a model on `(r, ξ)`.
#[derive(Debug, Clone, Copy)]
pub struct ReducedRadial<R> {
    pub radial: R,
    pub beta: f64,
}

impl<R: RadialSymbol> HamiltonianModel for ReducedRadial<R> {
    fn dimension(&self) -> usize {
        2
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.radial.jet(x[0], x[1], self.beta).value
    }
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        let j = self.radial.jet(x[0], x[1], self.beta);
        g[0] = j.grad[0];
        g[1] = j.grad[1];
    }
    fn hessian(&self, x: &[f64], h: &mut [f64]) {
        let j = self.radial.jet(x[0], x[1], self.beta);
        h.copy_from_slice(&[j.hess[0][0], j.hess[0][1], j.hess[1][0], j.hess[1][1]]);
    }
    fn in_chart(&self, x: &[f64]) -> bool {
        x[0] > self.radial.params().horizon_radius() * (1.0 + 1e-9)
    }
}

/// Freezes `(r, ξ)` along the base orbit while keeping the full Hessian, so a
/// trajectory started on the trapped set cannot be pushed off it by rounding.
/// Only the base point is pinned; the variational equation is unchanged.
#[derive(Debug, Clone, Copy)]
pub struct PinnedModel<M> {
    pub inner: M,
}

impl<M: HamiltonianModel> HamiltonianModel for PinnedModel<M> {
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }
    fn value(&self, x: &[f64]) -> f64 {
        self.inner.value(x)
    }
    fn gradient(&self, x: &[f64], g: &mut [f64]) {
        self.inner.gradient(x, g)
    }
    fn hessian(&self, x: &[f64], h: &mut [f64]) {
        self.inner.hessian(x, h)
    }
    fn in_chart(&self, x: &[f64]) -> bool {
        self.inner.in_chart(x)
    }
    fn conserved_names(&self) -> Vec<&'static str> {
        self.inner.conserved_names()
    }
    fn conserved(&self, x: &[f64]) -> Vec<f64> {
        self.inner.conserved(x)
    }
    fn field(&self, x: &[f64], out: &mut [f64]) {
        self.inner.field(x, out);
        out[0] = 0.0;
        out[3] = 0.0;
    }
}
