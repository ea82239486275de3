use kerr_geometry::KerrParams;
use serde::Serialize;

use crate::radial::RadialSymbol;
use crate::saddle::{kerr_radial, radial_saddle};
use crate::TrapError;

/// An equatorial critical value of `β` on `K ∩ p⁻¹(λ)` with the Hessian of
/// `β` as a function of `(α, θ)` there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub beta: f64,
    /// `[[β_αα, β_αθ], [β_θα, β_θθ]]`.
    pub hessian: [[f64; 2]; 2],
}

/// `G(β) = (a − β)² + R(saddle(β), β) − λ` and its derivative. The saddle
/// conditions make `dR/dβ` equal to the partial `∂R/∂β`.
fn shell_defect<R: RadialSymbol + ?Sized>(radial: &R, lambda: f64, beta: f64) -> Result<(f64, f64), TrapError> {
    let a = radial.params().spin();
    let (r, xi) = radial_saddle(radial, beta)?;
    let j = radial.jet(r, xi, beta);
    Ok(((a - beta).powi(2) + j.value - lambda, -2.0 * (a - beta) + j.grad[2]))
}

fn root_in<R: RadialSymbol + ?Sized>(
    radial: &R,
    lambda: f64,
    mut inside: f64,
    mut outside: f64,
) -> Result<f64, TrapError> {
    for _ in 0..200 {
        let mid = 0.5 * (inside + outside);
        if (outside - inside).abs() < 1e-4 {
            break;
        }
        if shell_defect(radial, lambda, mid)?.0 < 0.0 {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    let mut b = 0.5 * (inside + outside);
    for _ in 0..50 {
        let (g, dg) = shell_defect(radial, lambda, b)?;
        let next = b - g / dg;
        let next = if (next - inside) * (next - outside) < 0.0 { next } else { 0.5 * (inside + outside) };
        if g < 0.0 {
            inside = b;
        } else {
            outside = b;
        }
        let done = (next - b).abs() <= 1e-15 * b.abs().max(1.0);
        b = next;
        if done {
            break;
        }
    }
    Ok(b)
}

/// The two equatorial critical values `β₋ < 0 < β₊` (for small spin) of `β` on
/// `K ∩ p⁻¹(λ)`, where `𝒦 = (a − β)²`.
pub fn beta_interval<R: RadialSymbol + ?Sized>(radial: &R, lambda: f64) -> Result<(f64, f64), TrapError> {
    let m = radial.params().mass();
    let b0 = radial.params().spin();
    if shell_defect(radial, lambda, b0)?.0 >= 0.0 {
        return Err(TrapError::InvalidInput(format!("energy {lambda} is above the trapped shell at beta=a")));
    }
    let mut ends = [0.0; 2];
    for (slot, dir) in ends.iter_mut().zip([-1.0, 1.0]) {
        let mut step = m;
        let mut prev = b0;
        loop {
            let b = b0 + dir * step;
            if shell_defect(radial, lambda, b)?.0 > 0.0 {
                *slot = root_in(radial, lambda, prev, b)?;
                break;
            }
            prev = b;
            step *= 2.0;
            if step > 1e4 * m {
                return Err(TrapError::NoBracket { beta: b });
            }
        }
    }
    Ok((ends[0], ends[1]))
}

pub fn critical_points_for<R: RadialSymbol + ?Sized>(radial: &R, lambda: f64) -> Result<Vec<CriticalPoint>, TrapError> {
    let a = radial.params().spin();
    let (lo, hi) = beta_interval(radial, lambda)?;
    let mut out = Vec::with_capacity(2);
    for beta in [lo, hi] {
        let (_, f_beta) = shell_defect(radial, lambda, beta)?;
        let b_aa = -2.0 / f_beta;
        let b_tt = -2.0 * (beta * beta - a * a) / f_beta;
        let det = b_aa * b_tt;
        if !(det.abs() > 1e-6) {
            return Err(TrapError::DegenerateCritical { beta, det });
        }
        out.push(CriticalPoint { beta, hessian: [[b_aa, 0.0], [0.0, b_tt]] });
    }
    Ok(out)
}

/// Equatorial critical points of `β` on `K ∩ p⁻¹(λ)` for Kerr with `a ≤ 0.3M`.
pub fn beta_critical_points(lambda: f64, params: &KerrParams) -> Result<Vec<CriticalPoint>, TrapError> {
    if params.spin() > 0.3 * params.mass() {
        return Err(TrapError::InvalidInput(format!("spin {} exceeds 0.3 M", params.spin())));
    }
    critical_points_for(&kerr_radial(params), lambda)
}
