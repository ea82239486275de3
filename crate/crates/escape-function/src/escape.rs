use hamiltonian_dynamics::HamiltonianModel;
use rayon::prelude::*;
use serde::Serialize;

use crate::cutoff::Cutoff;
use crate::g1::G1;
use crate::pair::DefiningPair;
use crate::EscapeError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EscapeSpec {
    pub h: f64,
    pub htilde: f64,
    /// Cutoff around the trapped point, in adapted radius.
    pub chi: Cutoff,
    pub chi1: Cutoff,
    /// Weight `C₁` of the exterior term.
    pub c1: f64,
    pub g1: G1,
    /// Weight `M` in `φ̃ = M h̃ (φ̂₊² + φ̂₋²) + h{φ̂₊, φ̂₋}`.
    pub m_const: f64,
}

impl EscapeSpec {
    /// Defaults `h̃ = 0.25`, `χ = (0.2, 0.5)`, `χ₁ = (0.6, 0.9)`, `C₁ = 10`, `M = 5`.
    pub fn new(h: f64, g1: G1) -> Self {
        Self {
            h,
            htilde: 0.25,
            chi: Cutoff::new(0.2, 0.5),
            chi1: Cutoff::new(0.6, 0.9),
            c1: 10.0,
            g1,
            m_const: 5.0,
        }
    }

    pub fn validate(&self) -> Result<(), EscapeError> {
        if !(self.h > 0.0 && self.h < self.htilde && self.htilde < 1.0) {
            return Err(EscapeError::InvalidSpec(format!("need 0 < h={} < htilde={} < 1", self.h, self.htilde)));
        }
        for c in [self.chi, self.chi1] {
            if !(c.inner > 0.0 && c.inner < c.outer) {
                return Err(EscapeError::InvalidNesting { inner: c.inner, outer: c.outer });
            }
        }
        if self.g1.v_radius > self.chi.inner {
            return Err(EscapeError::InvalidNesting { inner: self.g1.v_radius, outer: self.chi.inner });
        }
        if self.chi.outer > self.chi1.inner {
            return Err(EscapeError::InvalidNesting { inner: self.chi.outer, outer: self.chi1.inner });
        }
        if !(self.c1 >= 0.0 && self.m_const > 0.0) {
            return Err(EscapeError::InvalidSpec("C1 and M must be non-negative".into()));
        }
        Ok(())
    }

    pub fn eps2(&self) -> f64 {
        self.h / self.htilde
    }
}

/// `G = χ log((φ₋² + h/h̃)/(φ₊² + h/h̃)) + C₁ log(1/h) χ₁ G₁`.
#[derive(Debug, Clone, Copy)]
pub struct EscapeFunction<'a, M> {
    pub spec: EscapeSpec,
    pub pair: &'a DefiningPair<M>,
}

pub fn build_escape<M: HamiltonianModel>(
    spec: EscapeSpec,
    pair: &DefiningPair<M>,
) -> Result<EscapeFunction<'_, M>, EscapeError> {
    spec.validate()?;
    Ok(EscapeFunction { spec, pair })
}

impl<M: HamiltonianModel> EscapeFunction<'_, M> {
    /// Value and gradient.
    pub fn eval(&self, x: f64, xi: f64) -> (f64, [f64; 2]) {
        let sp = &self.spec;
        let e2 = sp.eps2();
        let (rho, drho) = self.pair.radius(x, xi);
        let (chi, dchi) = sp.chi.eval(rho);
        let (chi1, dchi1) = sp.chi1.eval(rho);
        let (pp, dpp) = self.pair.phi_plus(x, xi);
        let (pm, dpm) = self.pair.phi_minus(x, xi);
        let (ap, am) = (pp * pp + e2, pm * pm + e2);
        let l = (am / ap).ln();
        let w = sp.c1 * (1.0 / sp.h).ln();
        let (g1, dg1) = if chi1 > 0.0 && w > 0.0 { sp.g1.eval(x, xi) } else { (0.0, [0.0; 2]) };
        let mut grad = [0.0; 2];
        for k in 0..2 {
            let dl = 2.0 * pm * dpm[k] / am - 2.0 * pp * dpp[k] / ap;
            grad[k] = dchi * drho[k] * l + chi * dl + w * (dchi1 * drho[k] * g1 + chi1 * dg1[k]);
        }
        (chi * l + w * chi1 * g1, grad)
    }

    pub fn value(&self, x: f64, xi: f64) -> f64 {
        self.eval(x, xi).0
    }

    /// `φ̂± = c±φ±/√(φ±² + h/h̃)` with gradient.
    pub fn phi_hat(&self, i: usize, x: f64, xi: f64) -> (f64, [f64; 2]) {
        let e2 = self.spec.eps2();
        let (f, df) = self.pair.phi(i, x, xi);
        let (c, dc) = self.pair.c_with_gradient(i, x, xi);
        let s = (f * f + e2).sqrt();
        let s3 = s * s * s;
        (c * f / s, [dc[0] * f / s + c * e2 * df[0] / s3, dc[1] * f / s + c * e2 * df[1] / s3])
    }

    /// `φ̃/h̃ = M(φ̂₊² + φ̂₋²) + (h/h̃){φ̂₊, φ̂₋}`.
    pub fn phi_tilde(&self, x: f64, xi: f64) -> f64 {
        let (a, da) = self.phi_hat(0, x, xi);
        let (b, db) = self.phi_hat(1, x, xi);
        let br = da[1] * db[0] - da[0] * db[1];
        self.spec.m_const * (a * a + b * b) + self.spec.eps2() * br
    }
}

/// Points of an `n × n` grid on the square `[−radius, radius]²` in adapted
/// coordinates that lie in the disc of that radius, mapped back to `(x, ξ)`.
pub fn disc_grid<M: HamiltonianModel>(pair: &DefiningPair<M>, radius: f64, n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            let y = -radius + 2.0 * radius * i as f64 / (n - 1).max(1) as f64;
            let eta = -radius + 2.0 * radius * j as f64 / (n - 1).max(1) as f64;
            if y.hypot(eta) <= radius * (1.0 + 1e-12) {
                out.push(pair.from_adapted(y, eta));
            }
        }
    }
    out
}

/// `c₁ = min φ̃/h̃` over the grid.
pub fn commutator_lower_bound<M: HamiltonianModel>(
    spec: &EscapeSpec,
    pair: &DefiningPair<M>,
    grid: &[(f64, f64)],
) -> Result<f64, EscapeError> {
    if grid.len() < 25 {
        return Err(EscapeError::GridTooCoarse(format!("{} samples (need 25)", grid.len())));
    }
    let ef = build_escape(*spec, pair)?;
    Ok(grid.par_iter().map(|&(x, xi)| ef.phi_tilde(x, xi)).reduce(|| f64::INFINITY, f64::min))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeReport {
    pub c1: f64,
    #[serde(rename = "C")]
    pub order_c: f64,
    #[serde(rename = "N")]
    pub order_n: u32,
    pub bracket_min: f64,
    pub g1_floor: f64,
    pub violations: Vec<String>,
}
