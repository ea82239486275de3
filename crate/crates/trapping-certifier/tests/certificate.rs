use hamiltonian_dynamics::HamiltonianModel;
use kerr_geometry::KerrParams;
use trapping_certifier::*;

const SQRT27: f64 = 5.196152422706632;

fn newton_continuation(radial: &PerturbedRadial, beta: f64, start: (f64, f64), steps: usize) -> (f64, f64) {
    let eps = radial.epsilon;
    let (mut r, mut xi) = start;
    for s in 1..=steps {
        let stage = PerturbedRadial { epsilon: eps * s as f64 / steps as f64, ..radial.clone() };
        let red = ReducedRadial { radial: &stage, beta };
        for _ in 0..40 {
            let mut g = [0.0; 2];
            let mut h = [0.0; 4];
            red.gradient(&[r, xi], &mut g);
            red.hessian(&[r, xi], &mut h);
            let det = h[0] * h[3] - h[1] * h[2];
            let (dr, dx) = ((h[3] * g[0] - h[1] * g[1]) / det, (-h[2] * g[0] + h[0] * g[1]) / det);
            let mut lam = 1.0;
            while lam > 1e-4 {
                let mut g2 = [0.0; 2];
                red.gradient(&[r - lam * dr, xi - lam * dx], &mut g2);
                if g2[0].hypot(g2[1]) <= g[0].hypot(g[1]) {
                    break;
                }
                lam *= 0.5;
            }
            r -= lam * dr;
            xi -= lam * dx;
        }
    }
    (r, xi)
}

#[test]
fn schwarzschild_certificate() {
    let c = certify(0.0, &KerrParams::schwarzschild(1.0), 50.0, 9, 4).unwrap();
    assert!(c.passed, "{:?}", c.reasons);
    assert!(c.theta_rate >= 10.3 && c.theta_rate <= 6.0 * 3f64.sqrt() + 1e-6);
    assert!(c.tangential_slope <= 1.2);
    assert_eq!(c.ratio_checks.len(), 4);
    assert!(c.ratio_checks.iter().all(|r| r.passed && r.theta0 > 0.0 && r.c >= 1.0));
    assert_eq!(c.largest_r_passing, 4);
    // the pole-crossing orbit at β = 0 is dropped
    assert_eq!(c.beta_samples.len(), 8);
    assert!(c.beta_samples.iter().all(|s| s.beta.abs() > 1.0 && s.beta.abs() < SQRT27));
    for o in &c.orbits {
        assert!(o.invariance_angle < 1e-4 && o.alignment_angle < 1e-4);
        assert!((o.stable_rate - 6.0 * 3f64.sqrt()).abs() < 1e-6);
    }
}

#[test]
fn spinning_certificate_tracks_linearization() {
    let k = KerrParams::new(1.0, 0.1).unwrap();
    let c = certify(0.0, &k, 50.0, 9, 4).unwrap();
    assert!(c.passed, "{:?}", c.reasons);
    let a0 = 6.0 * 3f64.sqrt();
    assert!((c.theta_rate - a0).abs() < 0.1 * a0);
    let sweep = c
        .beta_samples
        .iter()
        .map(|s| linearization(s.beta, &k).unwrap().normal_exponent)
        .fold(f64::INFINITY, f64::min);
    assert!((c.theta_rate - sweep).abs() < 1e-6 * sweep);
}

#[test]
fn tangential_growth_on_long_horizon() {
    let opts = CertifyOptions { horizon: 100.0, n_beta: 5, ..CertifyOptions::default() };
    let c = certify_with(&KerrRadial { params: KerrParams::schwarzschild(1.0) }, 0.0, &opts).unwrap();
    assert!(c.tangential_slope <= 1.2);
    assert!(c.orbits.iter().all(|o| o.tangential_constant.is_finite()));
}

#[test]
fn degenerate_inputs() {
    let k = KerrParams::schwarzschild(1.0);
    assert!(matches!(certify(0.0, &k, 0.0, 9, 4), Err(TrapError::InvalidHorizon(_))));
    assert!(matches!(certify(0.0, &k, 10.0, 4, 4), Err(TrapError::InvalidInput(_))));
    assert!(matches!(certify(0.2, &k, 10.0, 9, 4), Err(TrapError::InvalidInput(_))));
    assert!(matches!(perturb_and_recertify(&k, 0.0, 0.06, 1), Err(TrapError::InvalidInput(_))));
}

#[test]
fn certificate_json_keys() {
    let opts = CertifyOptions { horizon: 5.0, n_beta: 5, ..CertifyOptions::default() };
    let c = certify_with(&KerrRadial { params: KerrParams::schwarzschild(1.0) }, 0.05, &opts).unwrap();
    let v = serde_json::to_value(&c).unwrap();
    for key in ["lambda", "beta_samples", "theta_rate", "ratio_checks", "tangential_slope", "passed", "reasons"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert!(v["beta_samples"][0].get("trapped_radius").is_some());
}

#[test]
fn zero_perturbation_is_identity() {
    let k = KerrParams::schwarzschild(1.0);
    let opts = CertifyOptions { horizon: 10.0, ..CertifyOptions::default() };
    let base = certify_with(&KerrRadial { params: k }, 0.0, &opts).unwrap();
    let rep = perturb_and_recertify_with(&k, 0.0, 0.0, 17, &opts).unwrap();
    assert_eq!(rep.displacement, 0.0);
    assert_eq!(rep.certificate, base);
}

#[test]
fn small_perturbations_recertify() {
    let k = KerrParams::schwarzschild(1.0);
    for seed in [1, 2] {
        let rep = perturb_and_recertify_with(&k, 0.0, 0.01, seed, &CertifyOptions::default()).unwrap();
        assert!(rep.certificate.passed, "seed {seed}: {:?}", rep.certificate.reasons);
        assert!(rep.displacement <= 0.05 && rep.displacement > 0.0);
        assert!(rep.exponent_shift <= 0.05);
        let radial = PerturbedRadial { base: KerrRadial { params: k }, epsilon: 0.01, pattern: BumpPattern::seeded(seed, 1.0) };
        for s in &rep.certificate.beta_samples {
            let (r, xi) = newton_continuation(&radial, s.beta, (3.0, 0.0), 8);
            assert!((r - s.trapped_radius).abs() < 1e-9 && (xi - s.trapped_xi).abs() < 1e-9);
        }
    }
}
