use std::sync::OnceLock;

use cap_spectrum::*;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

fn toy_matrix(h: f64) -> BandMatrix {
    discretize(&build_default(ModelKind::ToySech2, &ModelParams::default(), h).unwrap())
}

fn shared() -> &'static BandMatrix {
    static A: OnceLock<BandMatrix> = OnceLock::new();
    A.get_or_init(|| toy_matrix(0.1))
}

#[test]
fn lanczos_matches_dense_svd() {
    let a = toy_matrix(0.4);
    for z in [C64::new(0.0, 0.0), C64::new(0.1, 0.0), C64::new(-0.2, -0.1), C64::new(0.05, 0.2), C64::new(-0.6, 0.0)] {
        let lanczos = resolvent_norm(&a, z).unwrap();
        let dense = resolvent_norm_dense(&a, z).unwrap();
        assert!((lanczos / dense - 1.0).abs() < 1e-8, "z={z}: {lanczos} vs {dense}");
    }
}

#[test]
fn upper_half_plane_bound_dense() {
    let a = toy_matrix(0.4);
    for im in [1e-3, 0.01, 0.1, 0.3] {
        for re in [-0.25, 0.0, 0.25] {
            let n = resolvent_norm_dense(&a, C64::new(re, im)).unwrap();
            assert!(n <= (1.0 + 1e-12) / im, "z={re}+{im}i: {n}");
        }
    }
}

#[test]
fn blows_up_at_eigenvalues() {
    let h = 0.1;
    let a = shared();
    let z0 = slowest_mode(a, &EigenOptions::for_h(h)).unwrap().unwrap().z;
    let mut last = 0.0;
    for d in [1e-2, 1e-4, 1e-6, 1e-8] {
        let n = resolvent_norm(a, z0 + C64::new(0.0, d)).unwrap();
        assert!(n >= (1.0 - 1e-6) / d, "d={d}: {n}");
        assert!(n > last);
        last = n;
    }
}

#[test]
fn elliptic_energy_is_bounded() {
    // below min v = −1 the real part of A + 2 is positive definite
    let n = resolvent_norm(shared(), C64::new(-2.0, 0.0)).unwrap();
    assert!(n <= 1.0 + 1e-12, "{n}");
}

#[test]
fn singular_matrix_is_reported() {
    let mut a = BandMatrix::zeros(5, 1, 1);
    for i in 0..5 {
        a.set(i, i, C64::new(i as f64, 0.0));
    }
    assert!(matches!(resolvent_norm(&a, C64::new(0.0, 0.0)), Err(CapError::SingularMatrix { .. })));
    assert!(matches!(resolvent_norm(&a, C64::new(3.0, 0.0)), Err(CapError::SingularMatrix { .. })));
    assert!(resolvent_norm(&a, C64::new(0.5, 0.0)).is_ok());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn bounded_by_inverse_imaginary_part(re in -0.3f64..0.3, im in 1e-4f64..=0.3) {
        let n = resolvent_norm(shared(), C64::new(re, im)).unwrap();
        prop_assert!(n <= (1.0 + 10.0 * f64::EPSILON) / im);
    }
}
