use faer::{Mat, Side};
use num_complex::Complex64 as C64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::band::{dot, norm, BandMatrix};
use crate::CapError;

/// `‖(A − z)⁻¹‖ = 1/σ_min(A − z)`, from the top eigenvalue of
/// `(A − z)⁻¹(A − z)⁻ᴴ` by Lanczos with full reorthogonalization. Ritz values
/// approach the top eigenvalue from below, so the estimate never exceeds the
/// true norm by more than rounding.
pub fn resolvent_norm(a: &BandMatrix, z: C64) -> Result<f64, CapError> {
    let n = a.n();
    let lu = a.shifted(z).lu();
    if lu.is_singular() {
        return Err(CapError::SingularMatrix { z });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x1a2c);
    let mut q: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let s = norm(&q);
    q.iter_mut().for_each(|x| *x /= s);
    let mut basis: Vec<Vec<C64>> = vec![q];
    let (mut alpha, mut beta) = (Vec::<f64>::new(), Vec::<f64>::new());
    let max_steps = n.min(150);
    let mut theta = 0.0f64;
    let mut stable = 0;
    for k in 0..max_steps {
        let mut w = basis[k].clone();
        lu.solve_adjoint_in_place(&mut w);
        lu.solve_in_place(&mut w);
        if !w.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
            return Err(CapError::SingularMatrix { z });
        }
        alpha.push(dot(&basis[k], &w).re);
        for _ in 0..2 {
            for b in &basis {
                let c = dot(b, &w);
                w.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let bnorm = norm(&w);
        let m = alpha.len();
        let t = Mat::<f64>::from_fn(m, m, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let ev = t.self_adjoint_eigenvalues(Side::Lower).map_err(|_| CapError::SingularMatrix { z })?;
        let top = ev.last().copied().unwrap_or(0.0);
        if (top - theta).abs() <= 1e-15 * top {
            stable += 1;
        } else {
            stable = 0;
        }
        theta = top;
        if stable >= 3 || bnorm <= 1e-14 * top || k + 1 == max_steps {
            break;
        }
        beta.push(bnorm);
        w.iter_mut().for_each(|x| *x /= bnorm);
        basis.push(w);
    }
    let r = theta.sqrt();
    if r.is_finite() {
        Ok(r)
    } else {
        Err(CapError::SingularMatrix { z })
    }
}

/// Dense reference: `1/σ_min` from the full singular value decomposition.
pub fn resolvent_norm_dense(a: &BandMatrix, z: C64) -> Result<f64, CapError> {
    let d = a.shifted(z).to_dense();
    let sv = d.singular_values().map_err(|_| CapError::SingularMatrix { z })?;
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if smin > 0.0 {
        Ok(1.0 / smin)
    } else {
        Err(CapError::SingularMatrix { z })
    }
}
