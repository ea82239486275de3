use cap_spectrum::*;
use num_complex::Complex64 as C64;

#[test]
fn unitary_without_absorber() {
    let mut prob = build_default(ModelKind::ToySech2, &ModelParams::default(), 0.1).unwrap();
    prob.absorber.iter_mut().for_each(|w| *w = 0.0);
    let a = discretize(&prob);
    let u0 = gaussian_at_barrier(&prob);
    let fit = semigroup_decay(&a, prob.h, &u0, 5.0, &DecayOptions::default()).unwrap();
    let l0 = fit.log_norms[0];
    let drift = fit.log_norms.iter().map(|l| (l - l0).abs()).fold(0.0, f64::max);
    assert!(drift < 1e-8, "log-norm drift {drift}");
    assert!(fit.alpha.abs() < 1e-8);
}

#[test]
fn slowest_eigenvector_decays_at_gap_rate() {
    let h = 0.1;
    let prob = build_default(ModelKind::ToySech2, &ModelParams::default(), h).unwrap();
    let a = discretize(&prob);
    let mode = slowest_mode(&a, &EigenOptions::for_h(h)).unwrap().unwrap();
    let rate = -mode.z.im / h;
    let fit = semigroup_decay(&a, h, mode.vector.as_ref().unwrap(), 5.0, &DecayOptions::default()).unwrap();
    assert!((fit.alpha / rate - 1.0).abs() < 0.02, "alpha {} vs {rate}", fit.alpha);
    assert!(fit.steps > 0);
}

#[test]
fn gaussian_decays_within_factor_two() {
    let h = 0.05;
    let prob = build_default(ModelKind::ToySech2, &ModelParams::default(), h).unwrap();
    let a = discretize(&prob);
    let rate = spectral_gap(&prob, &GapOptions { axis: vec![], ..GapOptions::default() }).unwrap().nu;
    let u0 = gaussian_at_barrier(&prob);
    assert!(u0.iter().zip(&prob.absorber).all(|(u, w)| *w == 0.0 || *u == C64::new(0.0, 0.0)));
    let fit = semigroup_decay(&a, h, &u0, 10.0, &DecayOptions::default()).unwrap();
    assert!(fit.alpha >= 0.5 * rate && fit.alpha <= 2.0 * rate, "alpha {} vs {rate}", fit.alpha);
    assert!(fit.log_norms.windows(2).all(|w| w[1] <= w[0] + 1e-12));
}

#[test]
fn rejects_bad_input() {
    let prob = build_default(ModelKind::ToySech2, &ModelParams::default(), 0.2).unwrap();
    let a = discretize(&prob);
    let opts = DecayOptions::default();
    assert!(semigroup_decay(&a, 0.2, &[C64::new(1.0, 0.0)], 1.0, &opts).is_err());
    let zero = vec![C64::new(0.0, 0.0); a.n()];
    assert!(semigroup_decay(&a, 0.2, &zero, 1.0, &opts).is_err());
    let u0 = gaussian_at_barrier(&prob);
    assert!(semigroup_decay(&a, 0.2, &u0, 0.0, &opts).is_err());
}
