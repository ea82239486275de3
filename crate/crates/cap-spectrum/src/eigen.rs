//! Eigenvalues of banded matrices in a window below the real axis.

use faer::dyn_stack::{MemBuffer, MemStack, StackReq};
use faer::linalg::evd::{evd_cplx, evd_scratch, ComputeEigenvectors, EvdError};
use faer::matrix_free::eigen::{partial_eigen, partial_eigen_scratch, PartialEigenParams};
use faer::matrix_free::LinOp;
use faer::diag::Diag;
use faer::{Col, Mat, MatMut, MatRef, Par};
use num_complex::Complex64 as C64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::band::{dot, dot_t, norm, BandLu, BandMatrix};
use crate::CapError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EigenMethod {
    /// Dense for `n ≤ dense_cap`, shift-invert above.
    Auto,
    Dense,
    ShiftInvert,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenOptions {
    /// Half-width of the window in `Re z`.
    pub window: f64,
    /// Lowest `Im z` reported (negative).
    pub floor: f64,
    pub method: EigenMethod,
    pub dense_cap: usize,
    /// Number of shift-invert cells along the axis.
    pub shifts: usize,
    pub residual_tol: f64,
    pub keep_vectors: bool,
    pub seed: u64,
}

impl EigenOptions {
    /// Defaults for semiclassical parameter `h`: window 0.3, floor `−1.5h`.
    pub fn for_h(h: f64) -> Self {
        Self {
            window: 0.3,
            floor: -1.5 * h,
            method: EigenMethod::Auto,
            dense_cap: 4000,
            shifts: 12,
            residual_tol: 1e-8,
            keep_vectors: false,
            seed: 0x5eed,
        }
    }

    fn in_window(&self, z: C64) -> bool {
        z.re.abs() < self.window && z.im > self.floor
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Eigenpair {
    pub z: C64,
    /// `‖Av − zv‖/‖v‖`.
    pub residual: f64,
    #[serde(skip)]
    pub vector: Option<Vec<C64>>,
}

fn random_vector(n: usize, rng: &mut ChaCha8Rng) -> Vec<C64> {
    let v: Vec<C64> = (0..n).map(|_| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
    let s = norm(&v);
    v.into_iter().map(|x| x / s).collect()
}

fn normalize(v: &mut [C64]) -> f64 {
    let s = norm(v);
    v.iter_mut().for_each(|x| *x /= s);
    s
}

fn is_complex_symmetric(a: &BandMatrix) -> bool {
    a.lower_bandwidth() == a.upper_bandwidth() && a.entries().iter().all(|&(i, j, v)| a.get(j, i) == v)
}

/// Inverse iteration with Rayleigh-quotient updates from an approximate
/// eigenvalue. For complex-symmetric `A` the unconjugated quotient `vᵀAv/vᵀv`
/// is used; it is stationary at eigenvectors.
pub fn refine_eigenpair(
    a: &BandMatrix,
    z0: C64,
    start: Option<Vec<C64>>,
    tol: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(C64, Vec<C64>, f64), CapError> {
    let symmetric = is_complex_symmetric(a);
    let n = a.n();
    let mut v = start.unwrap_or_else(|| random_vector(n, rng));
    normalize(&mut v);
    let mut z = z0;
    let nudge = f64::EPSILON * a.max_abs().max(1.0);
    let mut best: Option<(C64, Vec<C64>, f64)> = None;
    // fixed-shift iterations first, so a close neighbour cannot capture the vector
    let mut lu = a.shifted(z).lu();
    for it in 0..6 {
        if it >= 3 {
            z = best.as_ref().map(|b| b.0).unwrap_or(z);
            lu = a.shifted(z).lu();
        }
        if lu.is_singular() {
            lu = a.shifted(z + C64::new(nudge, nudge)).lu();
        }
        lu.solve_in_place(&mut v);
        if !v.iter().all(|x| x.re.is_finite() && x.im.is_finite()) {
            v = random_vector(n, rng);
            lu = a.shifted(z + C64::new(nudge, nudge)).lu();
            lu.solve_in_place(&mut v);
        }
        normalize(&mut v);
        let av = a.apply(&v);
        let vtv = dot_t(&v, &v);
        let zq = if symmetric && vtv.norm() > 1e-3 { dot_t(&v, &av) / vtv } else { dot(&v, &av) };
        // for strongly non-normal pairs the shift itself can beat the quotient
        let (zq, res) = [zq, z]
            .into_iter()
            .map(|c| (c, av.iter().zip(&v).map(|(p, q)| (p - c * q).norm_sqr()).sum::<f64>().sqrt()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("two candidates");
        if best.as_ref().is_none_or(|b| res < b.2) {
            best = Some((zq, v.clone(), res));
        }
        if res < 0.01 * tol {
            break;
        }
    }
    let (z, v, res) = best.expect("at least one iteration");
    if res < tol {
        Ok((z, v, res))
    } else {
        Err(CapError::ConvergenceFailure { shift: z0, residual: res })
    }
}

/// `(A − σ)⁻¹` as a matrix-free operator.
#[derive(Debug)]
struct ShiftInvert<'a> {
    lu: &'a BandLu,
    n: usize,
}

impl LinOp<C64> for ShiftInvert<'_> {
    fn apply_scratch(&self, _rhs_ncols: usize, _par: Par) -> StackReq {
        StackReq::EMPTY
    }
    fn nrows(&self) -> usize {
        self.n
    }
    fn ncols(&self) -> usize {
        self.n
    }
    fn apply(&self, out: MatMut<'_, C64>, rhs: MatRef<'_, C64>, _par: Par, _stack: &mut MemStack) {
        let mut out = out;
        for c in 0..rhs.ncols() {
            let mut x: Vec<C64> = (0..self.n).map(|i| rhs[(i, c)]).collect();
            self.lu.solve_in_place(&mut x);
            for (i, v) in x.into_iter().enumerate() {
                out[(i, c)] = v;
            }
        }
    }
    fn conj_apply(&self, out: MatMut<'_, C64>, rhs: MatRef<'_, C64>, _par: Par, _stack: &mut MemStack) {
        let mut out = out;
        for c in 0..rhs.ncols() {
            let mut x: Vec<C64> = (0..self.n).map(|i| rhs[(i, c)].conj()).collect();
            self.lu.solve_in_place(&mut x);
            for (i, v) in x.into_iter().enumerate() {
                out[(i, c)] = v.conj();
            }
        }
    }
}

/// Ritz pairs `(θ, x)` of `(A − σ)⁻¹` with the `want` largest `|θ|` (Krylov–Schur).
fn shift_invert_arnoldi(lu: &BandLu, n: usize, want: usize, start: Vec<C64>) -> Vec<(C64, Vec<C64>)> {
    let op = ShiftInvert { lu, n };
    let want = want.min(n);
    let params = PartialEigenParams { min_dim: want + 16, max_dim: 2 * want + 32, max_restarts: 1000, ..Default::default() };
    let mut mem = MemBuffer::new(partial_eigen_scratch(&op, want, Par::Seq, params));
    let mut vecs = Mat::<C64>::zeros(n, want);
    let mut vals = vec![C64::new(0.0, 0.0); want];
    let v0 = Col::<C64>::from_fn(n, |i| start[i]);
    let info = partial_eigen(vecs.as_mut(), &mut vals, &op, v0.as_ref(), 1e-13, Par::Seq, MemStack::new(&mut mem), params);
    (0..info.n_converged_eigen).map(|c| (vals[c], (0..n).map(|i| vecs[(i, c)]).collect())).collect()
}

/// Eigenvalues of `a` nearest to `sigma`, enough of them to cover the disc
/// of radius `radius`. Returns approximate eigenvalues and Ritz vectors.
/// `hint` is the initial number of requested pairs; it is updated so that the
/// next shift can start from a similar count.
fn eigenvalues_near(
    a: &BandMatrix,
    sigma: C64,
    radius: f64,
    hint: &mut usize,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(C64, Vec<C64>)>, CapError> {
    let n = a.n();
    let lu = a.shifted(sigma).lu();
    if lu.is_singular() {
        return Err(CapError::ConvergenceFailure { shift: sigma, residual: f64::NAN });
    }
    let mut want = (*hint).clamp(1, n.saturating_sub(2).max(1));
    loop {
        let start = random_vector(n, rng);
        let pairs = shift_invert_arnoldi(&lu, n, want, start);
        let farthest = pairs.iter().map(|(t, _)| 1.0 / t.norm()).fold(0.0, f64::max);
        let exhausted = 2 * want + 32 >= n;
        if pairs.len() < want && !exhausted {
            return Err(CapError::ConvergenceFailure { shift: sigma, residual: f64::NAN });
        }
        if farthest > radius || exhausted {
            let inside = pairs.iter().filter(|(t, _)| 1.0 / t.norm() <= radius).count();
            *hint = if 2 * inside > want { want } else { (want / 2).max(16) };
            return Ok(pairs.into_iter().map(|(t, x)| (sigma + t.inv(), x)).collect());
        }
        if want >= 512 {
            return Err(CapError::ConvergenceFailure { shift: sigma, residual: f64::NAN });
        }
        want *= 2;
    }
}

/// Sequential dense QR, so that results do not depend on the thread pool.
fn dense_eigenvalues(a: MatRef<'_, C64>) -> Result<Vec<C64>, EvdError> {
    let n = a.nrows();
    let mut s = Diag::<C64>::zeros(n);
    let scratch = evd_scratch::<C64>(n, ComputeEigenvectors::No, ComputeEigenvectors::No, Par::Seq, Default::default());
    evd_cplx(a, s.as_mut(), None, None, Par::Seq, MemStack::new(&mut MemBuffer::new(scratch)), Default::default())?;
    Ok(s.column_vector().iter().copied().collect())
}

/// All eigenvalues of `a` with `|Re z| < window` and `Im z > floor`, each
/// certified by its residual.
pub fn eigenvalues(a: &BandMatrix, opts: &EigenOptions) -> Result<Vec<Eigenpair>, CapError> {
    let n = a.n();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let dense = match opts.method {
        EigenMethod::Dense => true,
        EigenMethod::ShiftInvert => false,
        EigenMethod::Auto => n <= opts.dense_cap,
    };
    let mut candidates: Vec<(C64, Option<Vec<C64>>)> = Vec::new();
    if dense {
        let vals = dense_eigenvalues(a.to_dense().as_ref())
            .map_err(|_| CapError::ConvergenceFailure { shift: C64::new(0.0, 0.0), residual: f64::NAN })?;
        candidates.extend(vals.into_iter().filter(|z| opts.in_window(*z)).map(|z| (z, None)));
    } else {
        let cells = opts.shifts.max(1);
        let width = 2.0 * opts.window / cells as f64;
        let mid_im = 0.5 * opts.floor;
        let radius = (0.25 * width * width + mid_im * mid_im).sqrt();
        let mut hint = 16usize;
        for c in 0..cells {
            let lo = -opts.window + c as f64 * width;
            let sigma = C64::new(lo + 0.5 * width, mid_im);
            for (z, x) in eigenvalues_near(a, sigma, radius, &mut hint, &mut rng)? {
                let owned = z.re >= lo && (z.re < lo + width || c + 1 == cells);
                if owned && opts.in_window(z) {
                    candidates.push((z, Some(x)));
                }
            }
        }
    }
    let mut out: Vec<Eigenpair> = Vec::with_capacity(candidates.len());
    for (z0, start) in candidates {
        // a Ritz pair that already meets the tolerance is kept as is; refining
        // it could slide onto a nearly degenerate neighbour
        let direct = start.as_ref().map(|x| {
            let ax = a.apply(x);
            let res = ax.iter().zip(x).map(|(p, q)| (p - z0 * q).norm_sqr()).sum::<f64>().sqrt() / norm(x);
            (res, x)
        });
        let (z, v, residual) = match direct {
            Some((res, x)) if res < opts.residual_tol => (z0, x.clone(), res),
            // a Ritz value that refinement cannot certify is spurious: the
            // residual at the shift bounds σ_min(A − z0), so no eigenvalue is near
            Some(_) => match refine_eigenpair(a, z0, start, opts.residual_tol, &mut rng) {
                Ok(p) => p,
                Err(CapError::ConvergenceFailure { .. }) => continue,
                Err(e) => return Err(e),
            },
            None => refine_eigenpair(a, z0, start, opts.residual_tol, &mut rng)?,
        };
        if !opts.in_window(z) || out.iter().any(|e| (e.z - z).norm() < 1e-12 * z.norm().max(1.0)) {
            continue;
        }
        out.push(Eigenpair { z, residual, vector: opts.keep_vectors.then_some(v) });
    }
    out.sort_by(|x, y| y.z.im.total_cmp(&x.z.im).then(x.z.re.total_cmp(&y.z.re)));
    Ok(out)
}

/// The eigenpair in the window with the largest imaginary part, with its vector.
pub fn slowest_mode(a: &BandMatrix, opts: &EigenOptions) -> Result<Option<Eigenpair>, CapError> {
    let mut o = *opts;
    o.keep_vectors = true;
    Ok(eigenvalues(a, &o)?.into_iter().next())
}
