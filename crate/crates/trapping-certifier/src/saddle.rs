use kerr_geometry::{KerrParams, RadialPotential};
use serde::Serialize;

use crate::radial::{KerrRadial, RadialSymbol};
use crate::TrapError;

/// The trapped orbit of the radial system at one value of `β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrappedOrbitChart {
    pub beta: f64,
    pub trapped_radius: f64,
    /// Momentum at the saddle; zero for the unperturbed symbol.
    pub trapped_xi: f64,
    /// Generator of the `(r, ξ)` linearization under the half field `H/2`.
    pub lin_matrix: [[f64; 2]; 2],
    /// Expansion rate under the full field `H`.
    pub normal_exponent: f64,
    /// `∂²R/∂r²` at the saddle (`v_β″` for Kerr).
    pub potential_curvature: f64,
    /// `|B′_analytic − B′_fd|` for Kerr, zero otherwise.
    pub fd_agreement: f64,
}

pub fn potential_v(r: f64, beta: f64, params: &KerrParams) -> Result<f64, TrapError> {
    let r_plus = params.horizon_radius();
    if !(r > r_plus) {
        return Err(TrapError::Domain(kerr_geometry::GeometryError::InsideHorizon { r, r_plus }));
    }
    Ok(RadialPotential::new(*params, beta).value(r))
}

/// The critical point of `v_β` outside the horizon, by bracketed bisection
/// followed by safeguarded Newton steps.
pub fn trapped_radius(beta: f64, params: &KerrParams) -> Result<f64, TrapError> {
    let v = RadialPotential::new(*params, beta);
    let m = params.mass();
    let mut lo = params.horizon_radius() + 1e-6 * m;
    let mut hi = 4.0 * m;
    if !(v.d1(lo) > 0.0) {
        return Err(TrapError::NoBracket { beta });
    }
    while v.d1(hi) >= 0.0 {
        hi *= 2.0;
        if hi > 1e4 * m {
            return Err(TrapError::NoBracket { beta });
        }
    }
    while hi - lo > 1e-3 * m {
        let mid = 0.5 * (lo + hi);
        if v.d1(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut r = 0.5 * (lo + hi);
    for _ in 0..60 {
        let f = v.d1(r);
        if f == 0.0 {
            break;
        }
        if f > 0.0 {
            lo = r;
        } else {
            hi = r;
        }
        let mut next = r - f / v.d2(r);
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        let done = (next - r).abs() <= 4.0 * f64::EPSILON * r;
        r = next;
        if done {
            break;
        }
    }
    let curv = v.d2(r);
    if !(curv.abs() >= 1e-8) || curv > 0.0 {
        return Err(TrapError::Degenerate { beta, curvature: curv });
    }
    Ok(r)
}

/// Five-point derivative of the factored `B(r)`.
fn b_prime_fd(v: &RadialPotential, r: f64) -> f64 {
    let h = 1e-3 * r;
    (-v.b_factored(r + 2.0 * h) + 8.0 * v.b_factored(r + h) - 8.0 * v.b_factored(r - h)
        + v.b_factored(r - 2.0 * h))
        / (12.0 * h)
}

pub fn linearization(beta: f64, params: &KerrParams) -> Result<TrappedOrbitChart, TrapError> {
    let r = trapped_radius(beta, params)?;
    let v = RadialPotential::new(*params, beta);
    let delta = params.delta(r);
    let bp = v.b_prime(r);
    if !(bp > 0.0) {
        return Err(TrapError::NotHyperbolic { beta, b_prime: bp });
    }
    Ok(TrappedOrbitChart {
        beta,
        trapped_radius: r,
        trapped_xi: 0.0,
        lin_matrix: [[0.0, delta], [bp, 0.0]],
        normal_exponent: 2.0 * (delta * bp).sqrt(),
        potential_curvature: v.d2(r),
        fd_agreement: (bp - b_prime_fd(&v, r)).abs(),
    })
}

/// Newton iteration on `∂R/∂r = ∂R/∂ξ = 0`, damped by step halving.
pub fn locate_saddle<R: RadialSymbol + ?Sized>(
    radial: &R,
    beta: f64,
    guess: (f64, f64),
) -> Result<(f64, f64), TrapError> {
    let resid = |r: f64, xi: f64| {
        let j = radial.jet(r, xi, beta);
        (j.grad[0], j.grad[1])
    };
    let norm = |f: (f64, f64)| f.0.hypot(f.1);
    let (mut r, mut xi) = guess;
    let r_min = radial.params().horizon_radius();
    let mut f = resid(r, xi);
    for _ in 0..50 {
        if norm(f) < 1e-12 {
            return Ok((r, xi));
        }
        let j = radial.jet(r, xi, beta);
        let (a, b, c, d) = (j.hess[0][0], j.hess[0][1], j.hess[1][0], j.hess[1][1]);
        let det = a * d - b * c;
        if det == 0.0 || !det.is_finite() {
            return Err(TrapError::NewtonDiverged { beta });
        }
        let dr = -(d * f.0 - b * f.1) / det;
        let dxi = -(-c * f.0 + a * f.1) / det;
        let mut step = 1.0;
        loop {
            let (rn, xn) = (r + step * dr, xi + step * dxi);
            if rn > r_min {
                let fnew = resid(rn, xn);
                if norm(fnew) < norm(f) || norm(fnew) < 1e-12 {
                    r = rn;
                    xi = xn;
                    f = fnew;
                    break;
                }
            }
            step *= 0.5;
            if step < 1e-6 {
                // accept a full step when no decrease is possible at round-off level
                if norm(f) < 1e-10 {
                    return Ok((r, xi));
                }
                return Err(TrapError::NewtonDiverged { beta });
            }
        }
    }
    if norm(f) < 1e-12 {
        Ok((r, xi))
    } else {
        Err(TrapError::NewtonDiverged { beta })
    }
}

/// Chart of a general radial symbol at a saddle `(r, ξ)`.
pub fn saddle_chart<R: RadialSymbol + ?Sized>(
    radial: &R,
    beta: f64,
    saddle: (f64, f64),
) -> Result<TrappedOrbitChart, TrapError> {
    let j = radial.jet(saddle.0, saddle.1, beta);
    let (hrr, hrx, hxx) = (j.hess[0][0], j.hess[0][1], j.hess[1][1]);
    let mu2 = hrx * hrx - hrr * hxx;
    if !(mu2 > 0.0) {
        return Err(TrapError::NotHyperbolic { beta, b_prime: -hrr / 2.0 });
    }
    Ok(TrappedOrbitChart {
        beta,
        trapped_radius: saddle.0,
        trapped_xi: saddle.1,
        lin_matrix: [[0.5 * hrx, 0.5 * hxx], [-0.5 * hrr, -0.5 * hrx]],
        normal_exponent: mu2.sqrt(),
        potential_curvature: hrr,
        fd_agreement: 0.0,
    })
}

/// Saddle of a radial symbol, seeded from the unperturbed Kerr trapped radius.
pub fn radial_saddle<R: RadialSymbol + ?Sized>(radial: &R, beta: f64) -> Result<(f64, f64), TrapError> {
    let r0 = trapped_radius(beta, radial.params())?;
    locate_saddle(radial, beta, (r0, 0.0))
}

pub fn kerr_radial(params: &KerrParams) -> KerrRadial {
    KerrRadial { params: *params }
}
