//! Smooth compactly supported perturbations `p + ε·δp` of the Kerr symbol.

use std::f64::consts::TAU;

use kerr_geometry::KerrParams;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::certify::{certify_with, CertifyOptions, TrapCertificate};
use crate::radial::{KerrRadial, RadialJet, RadialSymbol};
use crate::saddle::{linearization, trapped_radius};
use crate::TrapError;

/// `exp(−s²/(1−s²))` on `|s| < 1` with its first two derivatives.
fn bump(s: f64) -> (f64, f64, f64) {
    if s.abs() >= 1.0 {
        return (0.0, 0.0, 0.0);
    }
    let d = 1.0 - s * s;
    let b = (-s * s / d).exp();
    let u1 = 2.0 * s / (d * d);
    let u2 = (2.0 + 6.0 * s * s) / (d * d * d);
    (b, -u1 * b, (u1 * u1 - u2) * b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bump {
    pub amplitude: f64,
    pub modulation: f64,
    pub frequency: f64,
    pub phase: f64,
    pub r_center: f64,
    pub xi_center: f64,
    pub r_width: f64,
    pub xi_width: f64,
}

/// `δp(r, ξ, β) = Σ A (1 + c sin(ωβ + ψ)) B((r − r_k)/w_r) B((ξ − ξ_k)/w_ξ)`.
///
/// The pattern depends only on `(r, ξ, β)`, so the perturbed symbol keeps the
/// separated form and `β` stays conserved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BumpPattern {
    pub bumps: Vec<Bump>,
}

impl BumpPattern {
    /// Three bumps centred near the photon sphere, supported in `r ∈ (2.05M, 3.95M)`.
    pub fn seeded(seed: u64, mass: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bumps = (0..3)
            .map(|_| Bump {
                amplitude: rng.random_range(-1.0..1.0),
                modulation: rng.random_range(0.0..0.5),
                frequency: rng.random_range(0.2..1.0),
                phase: rng.random_range(0.0..TAU),
                r_center: mass * (3.0 + rng.random_range(-0.2..0.2)),
                xi_center: rng.random_range(-0.2..0.2),
                r_width: mass * rng.random_range(0.5..0.75),
                xi_width: rng.random_range(0.5..1.0),
            })
            .collect();
        Self { bumps }
    }

    pub fn jet(&self, r: f64, xi: f64, beta: f64) -> RadialJet {
        let mut out = RadialJet::default();
        for b in &self.bumps {
            let (x, x1, x2) = bump((r - b.r_center) / b.r_width);
            let (y, y1, y2) = bump((xi - b.xi_center) / b.xi_width);
            if x == 0.0 || y == 0.0 {
                continue;
            }
            let (x1, x2) = (x1 / b.r_width, x2 / (b.r_width * b.r_width));
            let (y1, y2) = (y1 / b.xi_width, y2 / (b.xi_width * b.xi_width));
            let (sn, cs) = (b.frequency * beta + b.phase).sin_cos();
            let s = b.amplitude * (1.0 + b.modulation * sn);
            let s1 = b.amplitude * b.modulation * b.frequency * cs;
            let s2 = -b.amplitude * b.modulation * b.frequency * b.frequency * sn;
            let mut h = [[0.0; 3]; 3];
            h[0][0] = s * x2 * y;
            h[0][1] = s * x1 * y1;
            h[0][2] = s1 * x1 * y;
            h[1][1] = s * x * y2;
            h[1][2] = s1 * x * y1;
            h[2][2] = s2 * x * y;
            for i in 0..3 {
                for j in 0..i {
                    h[i][j] = h[j][i];
                }
            }
            out += RadialJet { value: s * x * y, grad: [s * x1 * y, s * x * y1, s1 * x * y], hess: h };
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedRadial {
    pub base: KerrRadial,
    pub epsilon: f64,
    pub pattern: BumpPattern,
}

impl RadialSymbol for PerturbedRadial {
    fn params(&self) -> &KerrParams {
        &self.base.params
    }

    fn jet(&self, r: f64, xi: f64, beta: f64) -> RadialJet {
        let mut j = self.base.jet(r, xi, beta);
        let d = self.pattern.jet(r, xi, beta);
        j.value += self.epsilon * d.value;
        for i in 0..3 {
            j.grad[i] += self.epsilon * d.grad[i];
            for k in 0..3 {
                j.hess[i][k] += self.epsilon * d.hess[i][k];
            }
        }
        j
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub certificate: TrapCertificate,
    /// `max_β |r_ε(β) − r(β)|` over the certified samples.
    pub displacement: f64,
    /// `displacement / ε` (zero when `ε = 0`).
    pub constant_k: f64,
    /// `max_β |μ_ε(β) − μ(β)| / μ(β)`.
    pub exponent_shift: f64,
}

pub fn perturb_and_recertify(
    params: &KerrParams,
    lambda: f64,
    epsilon: f64,
    seed: u64,
) -> Result<(TrapCertificate, f64), TrapError> {
    let rep = perturb_and_recertify_with(params, lambda, epsilon, seed, &CertifyOptions::default())?;
    Ok((rep.certificate, rep.displacement))
}

pub fn perturb_and_recertify_with(
    params: &KerrParams,
    lambda: f64,
    epsilon: f64,
    seed: u64,
    opts: &CertifyOptions,
) -> Result<PerturbationReport, TrapError> {
    if !(epsilon.abs() <= 0.05) {
        return Err(TrapError::InvalidInput(format!("epsilon={epsilon} exceeds 0.05")));
    }
    let radial = PerturbedRadial {
        base: KerrRadial { params: *params },
        epsilon,
        pattern: BumpPattern::seeded(seed, params.mass()),
    };
    let certificate = certify_with(&radial, lambda, opts)?;
    let mut displacement: f64 = 0.0;
    let mut shift: f64 = 0.0;
    for c in &certificate.beta_samples {
        displacement = displacement.max((c.trapped_radius - trapped_radius(c.beta, params)?).abs());
        let mu = linearization(c.beta, params)?.normal_exponent;
        shift = shift.max((c.normal_exponent - mu).abs() / mu);
    }
    let constant_k = if epsilon == 0.0 { 0.0 } else { displacement / epsilon.abs() };
    Ok(PerturbationReport { certificate, displacement, constant_k, exponent_shift: shift })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_pattern_jet_matches_differences() {
        let p = BumpPattern::seeded(5, 1.0);
        let x = [3.05, 0.07, 1.3];
        let j = p.jet(x[0], x[1], x[2]);
        let h = 1e-5;
        for i in 0..3 {
            let mut a = x;
            let mut b = x;
            a[i] += h;
            b[i] -= h;
            let ja = p.jet(a[0], a[1], a[2]);
            let jb = p.jet(b[0], b[1], b[2]);
            assert!(((ja.value - jb.value) / (2.0 * h) - j.grad[i]).abs() < 1e-7);
            for k in 0..3 {
                assert!(((ja.grad[k] - jb.grad[k]) / (2.0 * h) - j.hess[i][k]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn support_stays_outside_horizon() {
        for seed in 0..50 {
            for b in BumpPattern::seeded(seed, 1.0).bumps {
                assert!(b.r_center - b.r_width > 2.0);
            }
        }
    }
}
