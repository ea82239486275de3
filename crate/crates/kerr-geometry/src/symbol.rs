use crate::potential::RadialTerms;
use crate::{ConservedTriple, GeometryError, KerrParams, PhaseState};

pub fn horizon_radius(params: &KerrParams) -> f64 {
    params.horizon_radius()
}

fn check_domain(s: &PhaseState, k: &KerrParams) -> Result<(), GeometryError> {
    let r_plus = k.horizon_radius();
    if !(s.r > r_plus) {
        return Err(GeometryError::InsideHorizon { r: s.r, r_plus });
    }
    if !(s.theta.sin().abs() > 1e-12) {
        return Err(GeometryError::PolarChart { theta: s.theta, min: 0.0 });
    }
    Ok(())
}

/// The rescaled principal symbol
/// `p = Δξ² + α² + (1/sin²θ − a²/Δ)β² − (4Mar/Δ)β − ((r²+a²)²/Δ − a² sin²θ)`.
pub fn symbol_p(s: &PhaseState, k: &KerrParams) -> Result<f64, GeometryError> {
    check_domain(s, k)?;
    Ok(p_unchecked(s, k))
}

pub(crate) fn p_unchecked(s: &PhaseState, k: &KerrParams) -> f64 {
    let a = k.spin();
    let sn = s.theta.sin();
    let rt = RadialTerms::new(k, s.r, s.beta);
    k.delta(s.r) * s.xi * s.xi + s.alpha * s.alpha + s.beta * s.beta / (sn * sn) + a * a * sn * sn
        - rt.q
}

/// Gradient of `p` in the order `(r, θ, φ, ξ, α, β)`.
pub fn symbol_p_gradient(s: &PhaseState, k: &KerrParams) -> [f64; 6] {
    let a = k.spin();
    let (sn, cs) = s.theta.sin_cos();
    let rt = RadialTerms::new(k, s.r, s.beta);
    let d = k.delta(s.r);
    let d1 = k.delta_prime(s.r);
    let b = s.beta;
    let s2 = sn * sn;
    [
        d1 * s.xi * s.xi - rt.q_r,
        -2.0 * b * b * cs / (s2 * sn) + 2.0 * a * a * sn * cs,
        0.0,
        2.0 * d * s.xi,
        2.0 * s.alpha,
        2.0 * b / s2 - rt.q_b,
    ]
}

/// Hessian of `p`, same ordering as [`symbol_p_gradient`].
pub fn symbol_p_hessian(s: &PhaseState, k: &KerrParams) -> [[f64; 6]; 6] {
    let a = k.spin();
    let (sn, cs) = s.theta.sin_cos();
    let rt = RadialTerms::new(k, s.r, s.beta);
    let d = k.delta(s.r);
    let d1 = k.delta_prime(s.r);
    let b = s.beta;
    let s2 = sn * sn;
    let mut h = [[0.0; 6]; 6];
    // r row
    h[0][0] = 2.0 * s.xi * s.xi - rt.q_rr;
    h[0][3] = 2.0 * d1 * s.xi;
    h[0][5] = -rt.q_rb;
    // θ row
    h[1][1] = b * b * (2.0 / s2 + 6.0 * cs * cs / (s2 * s2)) + 2.0 * a * a * (cs * cs - s2);
    h[1][5] = -4.0 * b * cs / (s2 * sn);
    h[3][3] = 2.0 * d;
    h[4][4] = 2.0;
    h[5][5] = 2.0 / s2 - rt.q_bb;
    for i in 0..6 {
        for j in 0..i {
            h[i][j] = h[j][i];
        }
    }
    h
}

/// The Hamilton vector field `H_p` (twice the half-field often displayed):
/// positions move by `∂p/∂(momenta)`, momenta by `−∂p/∂(positions)`.
pub fn hamilton_field(s: &PhaseState, k: &KerrParams) -> Result<[f64; 6], GeometryError> {
    check_domain(s, k)?;
    let g = symbol_p_gradient(s, k);
    Ok([g[3], g[4], g[5], -g[0], -g[1], -g[2]])
}

/// Carter constant `𝒦 = α² + (a sinθ − β/sinθ)²`.
pub fn carter(s: &PhaseState, k: &KerrParams) -> f64 {
    let sn = s.theta.sin();
    let w = k.spin() * sn - s.beta / sn;
    s.alpha * s.alpha + w * w
}

pub fn conserved(s: &PhaseState, k: &KerrParams) -> Result<ConservedTriple, GeometryError> {
    Ok(ConservedTriple { p_value: symbol_p(s, k)?, beta_value: s.beta, carter: carter(s, k) })
}

/// Principal symbol of `Q̃`: `2((r²+a²)²/Δ − a² sin²θ) + (4Mar/Δ)β`.
pub fn symbol_q(s: &PhaseState, k: &KerrParams) -> Result<f64, GeometryError> {
    check_domain(s, k)?;
    let a = k.spin();
    let d = k.delta(s.r);
    let sn = s.theta.sin();
    let w = s.r * s.r + a * a;
    Ok(2.0 * (w * w / d - a * a * sn * sn) + 4.0 * k.mass() * a * s.r * s.beta / d)
}

/// `(r⁴ + a²r² + 2Ma²r)/Δ + β²(r² − 2Mr)/Δ`, a lower bound for `σ(Q̃) + p`.
pub fn q_lower_bound(r: f64, beta: f64, k: &KerrParams) -> f64 {
    let a2 = k.spin() * k.spin();
    let m = k.mass();
    let d = k.delta(r);
    (r.powi(4) + a2 * r * r + 2.0 * m * a2 * r) / d + beta * beta * (r * r - 2.0 * m * r) / d
}

/// Rectangular sampling region in `(r, θ, β)`; `ξ = α = 0`, where `σ(Q̃) + p`
/// is smallest for fixed `(r, θ, β)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QRegion {
    pub r: (f64, f64),
    pub theta: (f64, f64),
    pub beta: (f64, f64),
    pub samples: usize,
}

pub fn q_positivity_margin(region: &QRegion, k: &KerrParams) -> Result<f64, GeometryError> {
    let QRegion { r, theta, beta, samples } = *region;
    if samples < 2 || r.0 > r.1 || theta.0 > theta.1 || beta.0 > beta.1 {
        return Err(GeometryError::BadRegion(format!("{region:?}")));
    }
    let lin = |lo: f64, hi: f64, i: usize| lo + (hi - lo) * i as f64 / (samples - 1) as f64;
    let mut margin = f64::INFINITY;
    for i in 0..samples {
        for j in 0..samples {
            for l in 0..samples {
                let s = PhaseState::new(lin(r.0, r.1, i), lin(theta.0, theta.1, j), 0.0, 0.0, 0.0, lin(beta.0, beta.1, l));
                let total = symbol_q(&s, k)? + symbol_p(&s, k)?;
                margin = margin.min(total - q_lower_bound(s.r, s.beta, k));
            }
        }
    }
    Ok(margin)
}

/// True inside the ergosphere, where `−a²/Δ + 1/sin²θ < 0`.
pub fn ergosphere_indicator(s: &PhaseState, k: &KerrParams) -> bool {
    let sn = s.theta.sin();
    -k.spin() * k.spin() / k.delta(s.r) + 1.0 / (sn * sn) < 0.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn hessian_is_gradient_derivative() {
        let k = KerrParams::new(1.0, 0.27).unwrap();
        let s = PhaseState::new(3.3, 1.1, 0.4, 0.2, -0.7, 2.5);
        let h = symbol_p_hessian(&s, &k);
        let e = 1e-6;
        for j in 0..6 {
            let mut xp = s.to_array();
            let mut xm = s.to_array();
            xp[j] += e;
            xm[j] -= e;
            let gp = symbol_p_gradient(&PhaseState::from_slice(&xp), &k);
            let gm = symbol_p_gradient(&PhaseState::from_slice(&xm), &k);
            for i in 0..6 {
                let fd = (gp[i] - gm[i]) / (2.0 * e);
                assert!((fd - h[i][j]).abs() < 1e-6 * (1.0 + h[i][j].abs()), "({i},{j}) fd={fd} h={}", h[i][j]);
            }
        }
    }

    #[test]
    fn separation_into_carter_and_radial() {
        let k = KerrParams::new(1.0, 0.4).unwrap();
        let s = PhaseState::new(4.1, 0.8, 0.0, 0.3, 0.5, -1.7);
        let v = crate::RadialPotential::new(k, s.beta).value(s.r);
        let lhs = symbol_p(&s, &k).unwrap();
        let rhs = carter(&s, &k) + k.delta(s.r) * s.xi * s.xi + v;
        assert!((lhs - rhs).abs() < 1e-12 * lhs.abs().max(1.0));
    }

    #[test]
    fn equatorial_photon_orbit_is_null() {
        let k = KerrParams::schwarzschild(1.0);
        let s = PhaseState::new(3.0, FRAC_PI_2, 0.0, 0.0, 0.0, 27f64.sqrt());
        assert!(symbol_p(&s, &k).unwrap().abs() < 1e-12);
    }
}
