use std::io::{self, Write};
use std::time::Instant;

use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::Serialize;

use crate::discretize::discretize;
use crate::eigen::{eigenvalues, EigenMethod, EigenOptions, Eigenpair};
use crate::model::{build_default, CapProblem, ModelKind, ModelParams};
use crate::resolvent::resolvent_norm;
use crate::CapError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapOptions {
    pub window: f64,
    /// The eigenvalue floor is `−floor_factor·h`.
    pub floor_factor: f64,
    pub method: EigenMethod,
    pub dense_cap: usize,
    pub shifts: usize,
    pub residual_tol: f64,
    /// Real points at which the resolvent norm is sampled.
    pub axis: Vec<f64>,
    pub seed: u64,
}

impl Default for GapOptions {
    fn default() -> Self {
        Self {
            window: 0.3,
            floor_factor: 1.5,
            method: EigenMethod::Auto,
            dense_cap: 4000,
            shifts: 12,
            residual_tol: 1e-8,
            axis: vec![-0.2, -0.1, 0.0, 0.1, 0.2],
            seed: 0x5eed,
        }
    }
}

impl GapOptions {
    pub fn eigen_options(&self, h: f64) -> EigenOptions {
        EigenOptions {
            window: self.window,
            floor: -self.floor_factor * h,
            method: self.method,
            dense_cap: self.dense_cap,
            shifts: self.shifts,
            residual_tol: self.residual_tol,
            seed: self.seed,
            ..EigenOptions::for_h(h)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumReport {
    pub kind: ModelKind,
    pub h: f64,
    pub n_points: usize,
    pub eigenvalues: Vec<Eigenpair>,
    /// `−max Im z` over the window; the floor depth when the window is empty.
    pub gap: f64,
    pub nu: f64,
    pub window_empty: bool,
    /// `(Re z, ‖(A − z)⁻¹‖)` along the real axis.
    pub resolvent_axis: Vec<(f64, f64)>,
    pub runtime: f64,
}

impl SpectrumReport {
    pub fn norm_at(&self, x: f64) -> Option<f64> {
        self.resolvent_axis.iter().find(|(z, _)| *z == x).map(|(_, n)| *n)
    }
}

pub fn spectral_gap(problem: &CapProblem, opts: &GapOptions) -> Result<SpectrumReport, CapError> {
    let clock = Instant::now();
    problem.validate()?;
    let a = discretize(problem);
    let eopts = opts.eigen_options(problem.h);
    let eigs = eigenvalues(&a, &eopts)?;
    let window_empty = eigs.is_empty();
    let gap = eigs.iter().map(|e| -e.z.im).fold(-eopts.floor, f64::min);
    let mut resolvent_axis = Vec::with_capacity(opts.axis.len());
    for &x in &opts.axis {
        let r = match resolvent_norm(&a, C64::new(x, 0.0)) {
            Ok(r) => r,
            Err(CapError::SingularMatrix { .. }) => f64::INFINITY,
            Err(e) => return Err(e),
        };
        resolvent_axis.push((x, r));
    }
    Ok(SpectrumReport {
        kind: problem.kind,
        h: problem.h,
        n_points: problem.n(),
        eigenvalues: eigs,
        gap,
        nu: gap / problem.h,
        window_empty,
        resolvent_axis,
        runtime: clock.elapsed().as_secs_f64(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub h: f64,
    pub gap: f64,
    pub nu: f64,
    pub norm_axis_z0: f64,
    pub runtime_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapSweep {
    pub kind: ModelKind,
    pub rows: Vec<SweepRow>,
    pub reports: Vec<SpectrumReport>,
    pub nu_min: f64,
    /// `ν` at the smallest `h` over `ν` at the next smallest.
    pub nu_ratio: f64,
    /// `max/min` of `‖R(0)‖·h/log(1/h)` across the sweep.
    pub resolvent_ratio: f64,
    pub passed: bool,
    pub reasons: Vec<String>,
}

/// Per-`h` gap reports, computed in parallel, with the sweep postconditions:
/// every gap positive and `ν` within `nu_tolerance` between the two smallest `h`.
pub fn gap_sweep(
    kind: ModelKind,
    params: &ModelParams,
    h_list: &[f64],
    opts: &GapOptions,
    nu_tolerance: f64,
) -> Result<GapSweep, CapError> {
    if h_list.is_empty() || h_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(CapError::InvalidProblem("h_list must be non-empty and strictly descending".into()));
    }
    let problems: Vec<CapProblem> = h_list.iter().map(|&h| build_default(kind, params, h)).collect::<Result<_, _>>()?;
    let reports: Vec<SpectrumReport> =
        problems.par_iter().map(|p| spectral_gap(p, opts)).collect::<Result<Vec<_>, _>>()?;
    let rows: Vec<SweepRow> = reports
        .iter()
        .map(|r| SweepRow {
            h: r.h,
            gap: r.gap,
            nu: r.nu,
            norm_axis_z0: r.norm_at(0.0).unwrap_or(f64::NAN),
            runtime_s: r.runtime,
        })
        .collect();
    let mut reasons = Vec::new();
    for r in &reports {
        if !(r.gap > 0.0) {
            reasons.push(format!("gap {} <= 0 at h = {}", r.gap, r.h));
        }
        if r.window_empty {
            reasons.push(format!("no eigenvalue above the floor at h = {}", r.h));
        }
    }
    let nu_min = rows.iter().map(|r| r.nu).fold(f64::INFINITY, f64::min);
    let nu_ratio = if rows.len() >= 2 { rows[rows.len() - 1].nu / rows[rows.len() - 2].nu } else { 1.0 };
    if (nu_ratio - 1.0).abs() > nu_tolerance {
        reasons.push(format!("nu ratio {nu_ratio} between the two smallest h exceeds {nu_tolerance}"));
    }
    let scaled: Vec<f64> = rows.iter().map(|r| r.norm_axis_z0 * r.h / (1.0 / r.h).ln()).collect();
    let resolvent_ratio = scaled.iter().copied().fold(0.0, f64::max) / scaled.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(GapSweep { kind, rows, reports, nu_min, nu_ratio, resolvent_ratio, passed: reasons.is_empty(), reasons })
}

fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

pub fn write_eigenvalues_csv<W: Write>(out: &mut W, reports: &[SpectrumReport]) -> io::Result<()> {
    writeln!(out, "h,re_z,im_z,residual")?;
    for r in reports {
        for e in &r.eigenvalues {
            writeln!(out, "{},{},{},{}", sci(r.h), sci(e.z.re), sci(e.z.im), sci(e.residual))?;
        }
    }
    Ok(())
}

/// Sweep table; `timing = false` writes zero runtimes so that reruns are byte-identical.
pub fn write_sweep_csv<W: Write>(out: &mut W, rows: &[SweepRow], timing: bool) -> io::Result<()> {
    writeln!(out, "h,gap,nu,norm_axis_z0,runtime_s")?;
    for r in rows {
        let t = if timing { r.runtime_s } else { 0.0 };
        writeln!(out, "{},{},{},{},{}", sci(r.h), sci(r.gap), sci(r.nu), sci(r.norm_axis_z0), sci(t))?;
    }
    Ok(())
}
