//! Numerical check of normal hyperbolicity of the trapped set.
//!
//! Each sampled `β` contributes one orbit on `K ∩ p⁻¹(λ)`, started on the
//! equator. Along it the tangent space splits as `TK ⊕ E⁺ ⊕ E⁻`; the split is
//! constant in Boyer–Lindquist coordinates because the radial block of the
//! Hessian depends only on `(r, ξ, β)`, which are frozen on the orbit. The
//! full variational equation is integrated in short segments and, after each
//! one, frames are projected back onto their bundle along the complementary
//! bundles, which removes round-off that the expansion would otherwise amplify.

use std::f64::consts::FRAC_PI_2;

use hamiltonian_dynamics::{fit_line, integrate_flow, tail_rate, HamiltonianModel};
use kerr_geometry::KerrParams;
use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::critical::beta_interval;
use crate::radial::{KerrRadial, PinnedModel, RadialSymbol, SeparableModel};
use crate::saddle::{radial_saddle, saddle_chart, TrappedOrbitChart};
use crate::TrapError;

#[derive(Debug, Clone, PartialEq)]
pub struct CertifyOptions {
    pub horizon: f64,
    pub n_beta: usize,
    pub r_max: usize,
    /// Energy-shell half-width `δ`.
    pub delta: f64,
    /// Fraction of the critical `β` interval excluded at each end.
    pub end_margin: f64,
    pub theta_min: f64,
    pub segment: f64,
    pub tol: f64,
    pub align_time: f64,
    /// Required ratio of the measured contraction rate to the linearized exponent.
    pub rate_fraction: f64,
    pub slope_limit: f64,
    pub angle_limit: f64,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            horizon: 50.0,
            n_beta: 9,
            r_max: 4,
            delta: 0.1,
            end_margin: 0.05,
            theta_min: 0.05,
            segment: 0.5,
            tol: 1e-11,
            align_time: 2.0,
            rate_fraction: 0.9,
            slope_limit: 1.2,
            angle_limit: 1e-4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioCheck {
    pub r: usize,
    pub theta0: f64,
    pub c: f64,
    pub passed: bool,
}

/// Diagnostics of one certified orbit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitReport {
    pub beta: f64,
    pub carter: f64,
    pub turning_theta: f64,
    /// Forward contraction rate of `E⁻`.
    pub stable_rate: f64,
    /// Backward contraction rate of `E⁺`.
    pub unstable_rate: f64,
    pub tangential_slope: f64,
    /// Empirical `C` in `‖dφᵗ|TK‖ ≤ C⟨t⟩`.
    pub tangential_constant: f64,
    pub alignment_angle: f64,
    pub invariance_angle: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrapCertificate {
    pub lambda: f64,
    pub beta_samples: Vec<TrappedOrbitChart>,
    pub theta_rate: f64,
    pub ratio_checks: Vec<RatioCheck>,
    pub tangential_slope: f64,
    pub passed: bool,
    pub reasons: Vec<String>,
    pub largest_r_passing: usize,
    pub orbits: Vec<OrbitReport>,
}

/// Time series from one orbit, sampled at `t_k = k·segment`.
struct OrbitSeries {
    chart: TrappedOrbitChart,
    report: OrbitReport,
    log_tk_fwd: Vec<f64>,
    log_tk_bwd: Vec<f64>,
    log_em_fwd: Vec<f64>,
    log_ep_bwd: Vec<f64>,
}

pub fn certify(
    lambda: f64,
    params: &KerrParams,
    horizon: f64,
    n_beta: usize,
    r_max: usize,
) -> Result<TrapCertificate, TrapError> {
    let opts = CertifyOptions { horizon, n_beta, r_max, ..CertifyOptions::default() };
    certify_with(&KerrRadial { params: *params }, lambda, &opts)
}

/// Sampled `β` values: uniform inside the critical interval with end margins,
/// dropping orbits whose polar turning point comes within `2θ_min` of a pole.
pub fn sample_betas<R: RadialSymbol + ?Sized>(
    radial: &R,
    lambda: f64,
    opts: &CertifyOptions,
) -> Result<Vec<f64>, TrapError> {
    let (lo, hi) = beta_interval(radial, lambda)?;
    let w = hi - lo;
    let (a, b) = (lo + opts.end_margin * w, hi - opts.end_margin * w);
    let n = opts.n_beta;
    let mut out = Vec::new();
    for i in 0..n {
        let beta = a + (b - a) * i as f64 / (n - 1) as f64;
        let (r, xi) = radial_saddle(radial, beta)?;
        let carter = lambda - radial.jet(r, xi, beta).value;
        if turning_theta(radial.params().spin(), beta, carter) >= 2.0 * opts.theta_min {
            out.push(beta);
        }
    }
    Ok(out)
}

/// Smallest `θ ≤ π/2` reached by an orbit with Carter constant `carter`.
fn turning_theta(a: f64, beta: f64, carter: f64) -> f64 {
    let excess = |t: f64| {
        let s = t.sin();
        (a * s - beta / s).powi(2) - carter
    };
    if excess(FRAC_PI_2) > 0.0 {
        return FRAC_PI_2;
    }
    let (mut lo, mut hi) = (1e-9, FRAC_PI_2);
    if excess(lo) <= 0.0 {
        return 0.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

pub fn certify_with<R: RadialSymbol + Clone>(
    radial: &R,
    lambda: f64,
    opts: &CertifyOptions,
) -> Result<TrapCertificate, TrapError> {
    if !(opts.horizon > 0.0) || !opts.horizon.is_finite() {
        return Err(TrapError::InvalidHorizon(opts.horizon));
    }
    if !(lambda.abs() < opts.delta) {
        return Err(TrapError::InvalidInput(format!("|lambda|={} is not below delta={}", lambda.abs(), opts.delta)));
    }
    if opts.n_beta < 5 {
        return Err(TrapError::InvalidInput(format!("n_beta={} (need at least 5)", opts.n_beta)));
    }
    if opts.r_max == 0 {
        return Err(TrapError::InvalidInput("r_max must be positive".into()));
    }
    let betas = sample_betas(radial, lambda, opts)?;
    let series: Vec<OrbitSeries> = betas
        .par_iter()
        .map(|&b| certify_orbit(radial, lambda, b, opts))
        .collect::<Result<_, _>>()?;
    Ok(assemble(lambda, series, opts))
}

fn assemble(lambda: f64, series: Vec<OrbitSeries>, opts: &CertifyOptions) -> TrapCertificate {
    let mut reasons = Vec::new();
    let n_t = series.iter().map(|s| s.log_tk_fwd.len()).min().unwrap_or(0);
    let times: Vec<f64> = (1..=n_t).map(|k| k as f64 * opts.segment).collect();
    let fold = |f: &dyn Fn(&OrbitSeries, usize) -> f64, pick_max: bool| -> Vec<f64> {
        (0..n_t)
            .map(|k| {
                let it = series.iter().map(|s| f(s, k));
                if pick_max {
                    it.fold(f64::NEG_INFINITY, f64::max)
                } else {
                    it.fold(f64::INFINITY, f64::min)
                }
            })
            .collect()
    };
    let sup_tk_fwd = fold(&|s, k| s.log_tk_fwd[k], true);
    let sup_tk_bwd = fold(&|s, k| s.log_tk_bwd[k], true);
    let sup_em_fwd = fold(&|s, k| s.log_em_fwd[k], true);
    let inf_ep_bwd = fold(&|s, k| s.log_ep_bwd[k], false);

    let mut ratio_checks = Vec::new();
    let mut largest = 0;
    for r in 1..=opts.r_max {
        let rf = r as f64;
        let g: Vec<f64> = (0..n_t)
            .map(|k| {
                let g1 = -inf_ep_bwd[k] - rf * sup_tk_fwd[k];
                let g2 = -rf * sup_tk_bwd[k] - sup_em_fwd[k];
                g1.min(g2)
            })
            .collect();
        let (theta0, c) = if n_t >= 4 {
            let theta0 = 0.5 * tail_rate(&times, &g).slope;
            let worst = times.iter().zip(&g).map(|(t, gk)| theta0 * t - gk).fold(0.0f64, f64::max);
            (theta0, worst.exp())
        } else {
            (f64::NAN, f64::NAN)
        };
        let passed = theta0 > 0.0 && c.is_finite();
        if passed && largest == r - 1 {
            largest = r;
        }
        if !passed {
            reasons.push(format!("r-normal hyperbolicity inequality fails for r={r} (theta0={theta0})"));
        }
        ratio_checks.push(RatioCheck { r, theta0, c, passed });
    }

    let mut theta_rate = f64::INFINITY;
    let mut slope = f64::NEG_INFINITY;
    for s in &series {
        let rep = &s.report;
        let rate = rep.stable_rate.min(rep.unstable_rate);
        theta_rate = theta_rate.min(rate);
        slope = slope.max(rep.tangential_slope);
        if rate < opts.rate_fraction * s.chart.normal_exponent {
            reasons.push(format!(
                "beta={}: contraction rate {rate} below {} x exponent {}",
                rep.beta, opts.rate_fraction, s.chart.normal_exponent
            ));
        }
        if rep.tangential_slope > opts.slope_limit {
            reasons.push(format!("beta={}: tangential slope {} exceeds {}", rep.beta, rep.tangential_slope, opts.slope_limit));
        }
        if rep.invariance_angle > opts.angle_limit || rep.alignment_angle > opts.angle_limit {
            reasons.push(format!(
                "beta={}: normal bundles not invariant (angles {}, {})",
                rep.beta, rep.alignment_angle, rep.invariance_angle
            ));
        }
    }
    if series.is_empty() {
        reasons.push("no admissible beta samples".into());
        theta_rate = f64::NAN;
        slope = f64::NAN;
    }
    if !(theta_rate > 0.0) {
        reasons.push(format!("theta_rate={theta_rate} is not positive"));
    }
    let passed = reasons.is_empty();
    TrapCertificate {
        lambda,
        beta_samples: series.iter().map(|s| s.chart).collect(),
        theta_rate,
        ratio_checks,
        tangential_slope: slope,
        passed,
        reasons,
        largest_r_passing: largest,
        orbits: series.into_iter().map(|s| s.report).collect(),
    }
}

fn angle(u: &DVector<f64>, v: &DVector<f64>) -> f64 {
    let c = (u.dot(v) / (u.norm() * v.norm())).abs().min(1.0);
    (1.0 - c * c).sqrt()
}

fn certify_orbit<R: RadialSymbol + Clone>(
    radial: &R,
    lambda: f64,
    beta: f64,
    opts: &CertifyOptions,
) -> Result<OrbitSeries, TrapError> {
    let a = radial.params().spin();
    let saddle = radial_saddle(radial, beta)?;
    let chart = saddle_chart(radial, beta, saddle)?;
    let jet = radial.jet(saddle.0, saddle.1, beta);
    let carter = lambda - jet.value;
    let alpha0 = (carter - (a - beta).powi(2)).max(0.0).sqrt();
    let x0 = [saddle.0, FRAC_PI_2, 0.0, saddle.1, alpha0, beta];

    let mut model = SeparableModel::new(radial.clone());
    model.chart.theta_min = opts.theta_min;
    let pinned = PinnedModel { inner: model };

    // radial block of the Hessian
    let h = jet.hess;
    let (hrr, hrx, hxx, hrb, hxb) = (h[0][0], h[0][1], h[1][1], h[0][2], h[1][2]);
    let mu = chart.normal_exponent;
    let normal = |sign: f64| {
        let (vr, vx) = (hxx, sign * mu - hrx);
        // φ̇ = ∂p/∂β picks up the radial displacement
        let vphi = (hrb * vr + hxb * vx) / (sign * mu);
        let v = DVector::from_vec(vec![vr, 0.0, vphi, vx, 0.0, 0.0]);
        v.normalize()
    };
    let det = hrr * hxx - hrx * hrx;
    let dr = -(hxx * hrb - hrx * hxb) / det;
    let dx = -(-hrx * hrb + hrr * hxb) / det;
    let unit = |i: usize| {
        let mut v = DVector::zeros(6);
        v[i] = 1.0;
        v
    };
    let tk = [unit(1), unit(4), unit(2), DVector::from_vec(vec![dr, 0.0, 0.0, dx, 0.0, 1.0]).normalize()];

    let tol = opts.tol;
    let seg = opts.segment;
    let flow = |x: &[f64], dt: f64| integrate_flow(&pinned, x, dt, tol);

    // power alignment of the normal directions
    let mut ep = normal(1.0);
    let mut em = normal(-1.0);
    let n_align = (opts.align_time / seg).ceil() as usize;
    let mut align_angle: f64 = 0.0;
    for (v, dir) in [(&mut ep, 1.0), (&mut em, -1.0)] {
        let seed = v.clone();
        let mut x = x0.to_vec();
        for _ in 0..n_align {
            let res = flow(&x, dir * seg)?;
            *v = (&res.jacobian * &*v).normalize();
            x = res.end_state;
        }
        align_angle = align_angle.max(angle(&seed, v));
    }

    let mut basis = DMatrix::zeros(6, 6);
    for (j, v) in tk.iter().chain([&ep, &em]).enumerate() {
        basis.set_column(j, v);
    }
    let coords = basis.clone().try_inverse().ok_or(TrapError::NotHyperbolic { beta, b_prime: f64::NAN })?;
    let mut keep_tk = DMatrix::zeros(6, 6);
    for i in 0..4 {
        keep_tk[(i, i)] = 1.0;
    }
    let proj_tk = &basis * keep_tk * &coords;

    // orthonormal basis of TK_λ = TK ∩ ker dp
    let mut grad = [0.0; 6];
    pinned.gradient(&x0, &mut grad);
    let g = DVector::from_row_slice(&grad);
    let tmat = DMatrix::from_columns(&tk);
    let w = tmat.transpose() * &g;
    let frame0 = if w.norm() > 0.0 {
        // Householder reflector maps w to a multiple of e₁; its last columns span w⊥
        let mut hv = w.clone();
        let s = if hv[0] >= 0.0 { 1.0 } else { -1.0 };
        hv[0] += s * w.norm();
        let hh = DMatrix::identity(4, 4) - (&hv * hv.transpose()) * (2.0 / hv.norm_squared());
        let null = hh.columns(1, 3).into_owned();
        (tmat * null).qr().q()
    } else {
        tmat.columns(0, 3).into_owned().qr().q()
    };

    let n_seg = (opts.horizon / seg).round().max(1.0) as usize;
    let mut inv_angle: f64 = 0.0;
    let mut run = |dir: f64| -> Result<(Vec<f64>, Vec<f64>, Vec<f64>), TrapError> {
        let mut x = x0.to_vec();
        let mut frame = frame0.clone();
        let (mut lp, mut lm) = (0.0, 0.0);
        let mut tk_log = Vec::with_capacity(n_seg);
        let mut ep_log = Vec::with_capacity(n_seg);
        let mut em_log = Vec::with_capacity(n_seg);
        for _ in 0..n_seg {
            let res = flow(&x, dir * seg)?;
            let j = &res.jacobian;
            frame = &proj_tk * (j * &frame);
            tk_log.push(frame.singular_values().max().ln());
            let up = j * &ep;
            let um = j * &em;
            inv_angle = inv_angle.max(angle(&up, &ep)).max(angle(&um, &em));
            lp += (&coords * up)[4].abs().ln();
            lm += (&coords * um)[5].abs().ln();
            ep_log.push(lp);
            em_log.push(lm);
            x = res.end_state;
        }
        Ok((tk_log, ep_log, em_log))
    };
    let (log_tk_fwd, _, log_em_fwd) = run(1.0)?;
    let (log_tk_bwd, log_ep_bwd, _) = run(-1.0)?;

    let times: Vec<f64> = (1..=n_seg).map(|k| k as f64 * seg).collect();
    let stable_rate = -tail_rate(&times, &log_em_fwd).slope;
    let unstable_rate = -tail_rate(&times, &log_ep_bwd).slope;
    let slope_of = |logs: &[f64]| {
        let (lt, ly): (Vec<f64>, Vec<f64>) = times
            .iter()
            .zip(logs)
            .filter(|(t, _)| **t >= opts.horizon / 5.0 - 1e-12)
            .map(|(t, y)| (t.ln(), *y))
            .unzip();
        if lt.len() >= 2 {
            fit_line(&lt, &ly).slope
        } else {
            f64::NAN
        }
    };
    let tangential_slope = slope_of(&log_tk_fwd).max(slope_of(&log_tk_bwd));
    let tangential_constant = times
        .iter()
        .zip(log_tk_fwd.iter().zip(&log_tk_bwd))
        .map(|(t, (f, b))| f.max(*b).exp() / (1.0 + t * t).sqrt())
        .fold(0.0, f64::max);

    Ok(OrbitSeries {
        chart,
        report: OrbitReport {
            beta,
            carter,
            turning_theta: turning_theta(a, beta, carter),
            stable_rate,
            unstable_rate,
            tangential_slope,
            tangential_constant,
            alignment_angle: align_angle,
            invariance_angle: inv_angle,
        },
        log_tk_fwd,
        log_tk_bwd,
        log_em_fwd,
        log_ep_bwd,
    })
}
