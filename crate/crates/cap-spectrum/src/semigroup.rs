use std::collections::HashMap;

use hamiltonian_dynamics::fit_line;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::band::{norm, BandLu, BandMatrix};
use crate::model::CapProblem;
use crate::CapError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayOptions {
    /// Local error tolerance of the step-doubling controller, relative to `‖u‖`.
    pub tol: f64,
    pub dt0: f64,
    pub dt_max: f64,
    /// Fit `log‖u‖` on `t ≥ fit_from·T`.
    pub fit_from: f64,
}

impl Default for DecayOptions {
    fn default() -> Self {
        Self { tol: 1e-7, dt0: 0.02, dt_max: 0.5, fit_from: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    /// Decay rate: `‖u(t)‖ ~ e^{−αt}` on the tail.
    pub alpha: f64,
    pub times: Vec<f64>,
    pub log_norms: Vec<f64>,
    pub steps: usize,
    pub rejected: usize,
}

/// Crank–Nicolson propagator for `u′ = −(i/h)·A·u` at one step size.
struct CnStep {
    implicit: BandLu,
    explicit: BandMatrix,
}

impl CnStep {
    fn new(a: &BandMatrix, h: f64, dt: f64) -> Self {
        let s = C64::new(0.0, 0.5 * dt / h);
        Self {
            implicit: a.scaled_plus_identity(s, C64::new(1.0, 0.0)).lu(),
            explicit: a.scaled_plus_identity(-s, C64::new(1.0, 0.0)),
        }
    }

    fn apply(&self, u: &[C64]) -> Vec<C64> {
        let mut v = self.explicit.apply(u);
        self.implicit.solve_in_place(&mut v);
        v
    }
}

/// Evolves `u′ = −(i/h)·A·u` to time `t_final` with step-doubling control and
/// fits the tail decay rate of `‖u‖`.
pub fn semigroup_decay(
    a: &BandMatrix,
    h: f64,
    initial: &[C64],
    t_final: f64,
    opts: &DecayOptions,
) -> Result<DecayFit, CapError> {
    if initial.len() != a.n() {
        return Err(CapError::InvalidProblem(format!("initial state has length {}, expected {}", initial.len(), a.n())));
    }
    if !(t_final > 0.0) || !(h > 0.0) {
        return Err(CapError::InvalidProblem("final time and h must be positive".into()));
    }
    let n0 = norm(initial);
    if !(n0 > 0.0 && n0.is_finite()) {
        return Err(CapError::InvalidProblem("initial state has zero or non-finite norm".into()));
    }
    let mut cache: HashMap<i32, CnStep> = HashMap::new();
    let mut level = 0i32;
    let dt_of = |l: i32| opts.dt0 * 2f64.powi(l);
    let max_level = (opts.dt_max / opts.dt0).log2().floor() as i32;
    let mut u: Vec<C64> = initial.iter().map(|x| x / n0).collect();
    let mut t = 0.0;
    let mut log_scale = n0.ln();
    let mut times = vec![0.0];
    let mut log_norms = vec![log_scale];
    let (mut steps, mut rejected) = (0, 0);
    while t < t_final * (1.0 - 1e-12) {
        let mut lv = level;
        // the last step is shortened only through smaller levels
        while dt_of(lv) > t_final - t + 1e-12 && lv > -40 {
            lv -= 1;
        }
        let dt = dt_of(lv);
        for l in [lv, lv - 1] {
            cache.entry(l).or_insert_with(|| CnStep::new(a, h, dt_of(l)));
        }
        let big = cache[&lv].apply(&u);
        let half = cache[&(lv - 1)].apply(&cache[&(lv - 1)].apply(&u));
        let un = norm(&half);
        let err = big.iter().zip(&half).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt() / un.max(1e-300);
        if !err.is_finite() {
            return Err(CapError::InvalidProblem("evolution produced non-finite values".into()));
        }
        if err > opts.tol && lv > -40 {
            level = lv - 1;
            rejected += 1;
            continue;
        }
        t += dt;
        steps += 1;
        // renormalize to keep magnitudes bounded over long runs
        u = half.into_iter().map(|x| x / un).collect();
        log_scale += un.ln();
        times.push(t);
        log_norms.push(log_scale);
        if err < opts.tol / 8.0 && lv == level && level < max_level {
            level += 1;
        }
        if cache.len() > 8 {
            cache.retain(|l, _| (*l - level).abs() <= 2);
        }
    }
    let start = times.iter().position(|&s| s >= opts.fit_from * t_final).unwrap_or(0).min(times.len().saturating_sub(2));
    let fit = fit_line(&times[start..], &log_norms[start..]);
    Ok(DecayFit { alpha: -fit.slope, times, log_norms, steps, rejected })
}

/// Coherent state `exp(−(x − x₀)²/(2h))` at the barrier top, cut off where `W > 0`.
pub fn gaussian_at_barrier(problem: &CapProblem) -> Vec<C64> {
    let h = problem.h;
    let x0 = problem.barrier_top;
    (0..problem.n())
        .map(|i| {
            let x = problem.grid.node(i);
            let g = if problem.absorber[i] > 0.0 { 0.0 } else { (-(x - x0).powi(2) / (2.0 * h)).exp() };
            C64::new(g, 0.0)
        })
        .collect()
}
