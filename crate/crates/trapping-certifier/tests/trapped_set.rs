use std::f64::consts::FRAC_PI_2;

use hamiltonian_dynamics::models::ReducedKerr;
use hamiltonian_dynamics::{finite_time_exponents, tail_rate, tangent_flow};
use kerr_geometry::{hamilton_field, KerrParams, PhaseState, RadialPotential};
use nalgebra::Matrix2;
use proptest::prelude::*;
use trapping_certifier::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

#[test]
fn potential_values_at_zero_spin() {
    let k = KerrParams::schwarzschild(1.0);
    assert!(close(potential_v(3.0, 1.7, &k).unwrap(), -27.0, 1e-12));
    assert!(close(potential_v(4.0, -2.0, &k).unwrap(), -32.0, 1e-12));
    for &r in &[2.5f64, 3.3, 7.0] {
        let direct = -r.powi(4) / (r * r - 2.0 * r);
        assert!(close(potential_v(r, 0.3, &k).unwrap(), direct, 1e-12 * direct.abs()));
    }
    assert!(matches!(potential_v(2.0, 0.0, &k), Err(TrapError::Domain(_))));
}

#[test]
fn photon_sphere_radius() {
    let k = KerrParams::schwarzschild(1.0);
    for &b in &[-5.0, -1.0, 0.0, 2.0, 5.1] {
        assert!(close(trapped_radius(b, &k).unwrap(), 3.0, 1e-10));
    }
    assert!(close(trapped_radius(1.0, &KerrParams::schwarzschild(2.0)).unwrap(), 6.0, 1e-10));
}

#[test]
fn spinning_radius_matches_bisection() {
    let k = KerrParams::new(1.0, 0.1).unwrap();
    let v = RadialPotential::new(k, 2.0);
    let r = trapped_radius(2.0, &k).unwrap();
    assert!(r > 2.8 && r < 3.2);
    assert!(v.d1(r).abs() < 1e-12);
    let (mut lo, mut hi) = (2.5, 3.5);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if v.d1(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!(close(r, 0.5 * (lo + hi), 1e-12));
}

#[test]
fn schwarzschild_linearization() {
    let k = KerrParams::schwarzschild(1.0);
    for &b in &[-3.0, 0.5, 4.0] {
        let c = linearization(b, &k).unwrap();
        let m = c.lin_matrix;
        assert!(close(m[0][0], 0.0, 1e-12) && close(m[1][1], 0.0, 1e-12));
        assert!(close(m[0][1], 3.0, 1e-10) && close(m[1][0], 9.0, 1e-8));
        assert!(close(c.normal_exponent, 6.0 * 3f64.sqrt(), 1e-8));
        assert!(close(c.potential_curvature, -18.0, 1e-8));
        assert!(c.fd_agreement < 1e-7);
    }
}

#[test]
fn small_spin_exponent_matches_reduced_flow() {
    let k = KerrParams::new(1.0, 0.05).unwrap();
    let c = linearization(3.0, &k).unwrap();
    assert!((c.normal_exponent - 6.0 * 3f64.sqrt()).abs() < 0.05 * 6.0 * 3f64.sqrt());
    let model = ReducedKerr::new(k, 3.0);
    let ex = finite_time_exponents(&model, &[c.trapped_radius, 0.0], 2.0, 40).unwrap();
    let (t, y): (Vec<f64>, Vec<f64>) = ex.iter().map(|(t, s)| (*t, s[0])).unzip();
    assert!(close(tail_rate(&t, &y).slope, c.normal_exponent, 1e-4));
}

#[test]
fn exponent_scales_with_mass() {
    for &m in &[1.0, 2.0, 5.0] {
        let c = linearization(1.0, &KerrParams::schwarzschild(m)).unwrap();
        assert!(close(c.normal_exponent, 6.0 * 3f64.sqrt() * m, 1e-8 * m));
        assert!(close(c.trapped_radius, 3.0 * m, 1e-10 * m));
    }
}

#[test]
fn tangent_flow_reproduces_linearization() {
    let k = KerrParams::new(1.0, 0.1).unwrap();
    for &b in &[-3.0, 2.0] {
        let c = linearization(b, &k).unwrap();
        let t = 0.01;
        let j = tangent_flow(&ReducedKerr::new(k, b), &[c.trapped_radius, 0.0], t, 1e-13).unwrap();
        let l = Matrix2::new(c.lin_matrix[0][0], c.lin_matrix[0][1], c.lin_matrix[1][0], c.lin_matrix[1][1]);
        let e = (l * (2.0 * t)).exp();
        for i in 0..2 {
            for jj in 0..2 {
                assert!(close(j[(i, jj)], e[(i, jj)], 1e-6), "{i}{jj}: {} vs {}", j[(i, jj)], e[(i, jj)]);
            }
        }
    }
}

#[test]
fn schwarzschild_critical_points() {
    let k = KerrParams::schwarzschild(1.0);
    for &lambda in &[0.0f64, 1.0] {
        let s = (27.0f64 + lambda).sqrt();
        let cps = beta_critical_points(lambda, &k).unwrap();
        assert_eq!(cps.len(), 2);
        for (cp, sign) in cps.iter().zip([-1.0, 1.0]) {
            assert!(close(cp.beta, sign * s, 1e-9));
            assert!(close(cp.hessian[0][0], -sign / s, 1e-9));
            assert!(close(cp.hessian[1][1], -sign * s, 1e-8));
            assert_eq!(cp.hessian[0][1], 0.0);
        }
    }
}

/// `β(α, θ)` on `K ∩ p⁻¹(λ)` near `guess`, by bisection on the shell equation.
fn beta_on_shell(k: &KerrParams, lambda: f64, alpha: f64, theta: f64, guess: f64) -> f64 {
    let a = k.spin();
    let f = |b: f64| {
        let r = trapped_radius(b, k).unwrap();
        let s = theta.sin();
        alpha * alpha + (a * s - b / s).powi(2) + RadialPotential::new(*k, b).value(r) - lambda
    };
    let (mut lo, mut hi) = (guess - 0.5, guess + 0.5);
    let flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn spinning_critical_points_match_difference_hessian() {
    let k = KerrParams::new(1.0, 0.05).unwrap();
    let cps = beta_critical_points(0.0, &k).unwrap();
    let h = 1e-3;
    for cp in cps {
        let b = |al: f64, th: f64| beta_on_shell(&k, 0.0, al, th, cp.beta);
        let b0 = b(0.0, FRAC_PI_2);
        assert!(close(b0, cp.beta, 1e-9));
        let baa = (b(h, FRAC_PI_2) - 2.0 * b0 + b(-h, FRAC_PI_2)) / (h * h);
        let btt = (b(0.0, FRAC_PI_2 + h) - 2.0 * b0 + b(0.0, FRAC_PI_2 - h)) / (h * h);
        let bat = (b(h, FRAC_PI_2 + h) - b(h, FRAC_PI_2 - h) - b(-h, FRAC_PI_2 + h) + b(-h, FRAC_PI_2 - h)) / (4.0 * h * h);
        assert!(close(baa, cp.hessian[0][0], 1e-4 * baa.abs().max(1.0)), "{baa} vs {:?}", cp.hessian);
        assert!(close(btt, cp.hessian[1][1], 1e-4 * btt.abs().max(1.0)), "{btt} vs {:?}", cp.hessian);
        assert!(bat.abs() < 1e-5);
        assert!((cp.hessian[0][0] * cp.hessian[1][1]).abs() > 0.5);
    }
}

#[test]
fn large_spin_rejected() {
    let k = KerrParams::new(1.0, 0.5).unwrap();
    assert!(matches!(beta_critical_points(0.0, &k), Err(TrapError::InvalidInput(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn zero_spin_radius_is_beta_independent(b1 in -6.0f64..6.0, b2 in -6.0f64..6.0) {
        let k = KerrParams::schwarzschild(1.0);
        prop_assert!((trapped_radius(b1, &k).unwrap() - trapped_radius(b2, &k).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn chart_invariants(a in 0.0f64..0.3, b in -5.0f64..5.0, theta in 0.5f64..2.6, alpha in -1.0f64..1.0) {
        let k = KerrParams::new(1.0, a).unwrap();
        let c = linearization(b, &k).unwrap();
        let r = c.trapped_radius;
        let field = hamilton_field(&PhaseState::new(r, theta, 0.3, 0.0, alpha, b), &k).unwrap();
        prop_assert!(field[0].abs() < 1e-10 && field[3].abs() < 1e-10);
        let d = k.delta(r);
        let bp = c.lin_matrix[1][0];
        prop_assert!(bp > 0.0);
        prop_assert_eq!(c.lin_matrix[0][0], 0.0);
        prop_assert_eq!(c.lin_matrix[1][1], 0.0);
        prop_assert!((c.lin_matrix[0][1] - d).abs() < 1e-12 * d);
        prop_assert!((c.normal_exponent.powi(2) - 4.0 * d * bp).abs() < 1e-10 * c.normal_exponent.powi(2));
        let l = Matrix2::new(0.0, d, bp, 0.0);
        let ev = l.eigenvalues().unwrap();
        let s = (d * bp).sqrt();
        prop_assert!((ev.max() - s).abs() < 1e-10 * s && (ev.min() + s).abs() < 1e-10 * s);
        let g = saddle_chart(&kerr_radial(&k), b, (r, 0.0)).unwrap();
        prop_assert!((g.normal_exponent - c.normal_exponent).abs() < 1e-7 * c.normal_exponent);
    }
}
