use std::fs;
use std::io;
use std::path::PathBuf;

use cap_spectrum::{
    build_default, discretize, gap_sweep, resolvent_norm, write_eigenvalues_csv, write_sweep_csv, CapError,
    EigenMethod, GapOptions, ModelParams,
};
use escape_function::{
    build_defining_pair, build_escape, build_g1, commutator_lower_bound, disc_grid, order_function_check,
    order_function_sweep, sample_pairs, verify_defg_relations, DefiningPair, EscapeError, EscapeReport, EscapeSpec,
    SaddlePoint,
};
use hamiltonian_dynamics::models::{ReducedKerr, RescaledKerrModel, ToyBarrier};
use hamiltonian_dynamics::{integrate_flow, kerr_orbit_rows, write_orbit_csv, FlowError, HamiltonianModel};
use kerr_geometry::{KerrParams, RadialPotential};
use num_complex::Complex64 as C64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;
use trapping_certifier::{
    beta_critical_points, certify_with, linearization, perturb_and_recertify_with, CertifyOptions, KerrRadial,
    TrapError,
};

use crate::config::{Command, ConfigError, EscapeModel, RunConfig};
use crate::output::{ensure_writable, to_json, write_atomic};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_CHECK: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("no command given")]
    MissingCommand,
    #[error("output directory {path}: {source}")]
    Output { path: PathBuf, source: io::Error },
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("writing artifacts: {0}")]
    Io(#[from] io::Error),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) | RunError::MissingCommand | RunError::Output { .. } => EXIT_USAGE,
            RunError::Numerical(_) | RunError::Io(_) => EXIT_NUMERICAL,
        }
    }
}

macro_rules! numerical {
    ($($t:ty),*) => {$(
        impl From<$t> for RunError {
            fn from(e: $t) -> Self {
                RunError::Numerical(e.to_string())
            }
        }
    )*};
}
numerical!(TrapError, EscapeError, CapError, FlowError);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub check: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(check: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { check: check.into(), passed, detail: detail.into() }
    }
}

/// Result of one command: summary lines, checks and artifacts in write order.
#[derive(Debug, Default)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<(String, Vec<u8>)>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check::new(name, passed, detail));
    }
}

#[derive(Serialize)]
struct FailureFile<'a> {
    command: Option<Command>,
    seed: u64,
    error: Option<String>,
    failures: Vec<&'a Check>,
}

fn status(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn sci(x: f64) -> String {
    format!("{x:.11e}")
}

/// Computes a command's results without touching the file system.
pub fn compute(config: &RunConfig) -> Result<Outcome, RunError> {
    let command = config.command.ok_or(RunError::MissingCommand)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| RunError::Numerical(format!("worker pool: {e}")))?;
    pool.install(|| match command {
        Command::TrapFind => trap_find(config),
        Command::TrapCertify => trap_certify(config),
        Command::EscapeCheck => escape_check(config),
        Command::SpectrumGap => spectrum_gap(config),
        Command::SpectrumResolvent => spectrum_resolvent(config),
        Command::FlowIntegrate => flow_integrate(config),
        Command::Perturb => perturb(config),
    })
}

/// Runs a command end to end: computes, writes artifacts through a single
/// writer, writes `failures.json` on any failure and returns the exit code.
/// Summary lines go to `out`, errors to `err`.
pub fn execute<O: io::Write, E: io::Write>(config: &RunConfig, out: &mut O, err: &mut E) -> i32 {
    let dir = config.output_dir.clone();
    if let Err(source) = ensure_writable(&dir) {
        let e = RunError::Output { path: dir, source };
        let _ = writeln!(err, "error: {e}");
        return e.exit_code();
    }
    let result = compute(config).and_then(|outcome| {
        for (name, bytes) in &outcome.artifacts {
            write_atomic(&dir, name, bytes)?;
        }
        Ok(outcome)
    });
    let (code, failure) = match &result {
        Ok(o) => {
            for line in &o.lines {
                let _ = writeln!(out, "{line}");
            }
            if o.passed() {
                (EXIT_PASS, None)
            } else {
                for c in o.failures() {
                    let _ = writeln!(err, "check failed: {}: {}", c.check, c.detail);
                }
                (EXIT_CHECK, Some(FailureFile { command: config.command, seed: config.seed, error: None, failures: o.failures() }))
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            (e.exit_code(), Some(FailureFile { command: config.command, seed: config.seed, error: Some(e.to_string()), failures: vec![] }))
        }
    };
    let stale = dir.join("failures.json");
    match failure {
        Some(f) => {
            let written = to_json(&f).and_then(|bytes| write_atomic(&dir, "failures.json", &bytes));
            if let Err(e) = written {
                let _ = writeln!(err, "error: writing failures.json: {e}");
                return EXIT_NUMERICAL;
            }
        }
        None if stale.exists() => {
            if let Err(e) = fs::remove_file(&stale) {
                let _ = writeln!(err, "error: removing stale failures.json: {e}");
                return EXIT_NUMERICAL;
            }
        }
        None => {}
    }
    code
}

fn positive_critical_beta(lambda: f64, k: &KerrParams) -> Result<f64, RunError> {
    let pts = beta_critical_points(lambda, k)?;
    pts.iter().map(|p| p.beta).filter(|b| *b > 0.0).reduce(f64::max).ok_or_else(|| {
        RunError::Numerical(format!("no positive critical beta at lambda = {lambda}"))
    })
}

fn betas(config: &RunConfig, lambda: f64) -> Result<Vec<f64>, RunError> {
    match &config.beta_list {
        Some(b) => Ok(b.clone()),
        None => Ok(vec![positive_critical_beta(lambda, &config.kerr)?]),
    }
}

fn spins(config: &RunConfig) -> Result<Vec<KerrParams>, RunError> {
    match &config.a_list {
        Some(list) => list
            .iter()
            .map(|&a| KerrParams::new(config.kerr.mass(), a).map_err(|e| RunError::Numerical(e.to_string())))
            .collect(),
        None => Ok(vec![config.kerr]),
    }
}

fn certify_options(config: &RunConfig) -> CertifyOptions {
    CertifyOptions {
        horizon: config.trap.horizon,
        n_beta: config.trap.n_beta,
        r_max: config.trap.r_max,
        ..CertifyOptions::default()
    }
}

fn trap_find(config: &RunConfig) -> Result<Outcome, RunError> {
    let mut o = Outcome::default();
    for beta in betas(config, config.trap.lambda)? {
        let chart = linearization(beta, &config.kerr)?;
        o.lines.push(format!("r(beta)={:.12}, exponent={:.12}", chart.trapped_radius, chart.normal_exponent));
    }
    Ok(o)
}

fn trap_certify(config: &RunConfig) -> Result<Outcome, RunError> {
    let opts = certify_options(config);
    let params = spins(config)?;
    let certs = params
        .par_iter()
        .map(|k| certify_with(&KerrRadial { params: *k }, config.trap.lambda, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    let mut o = Outcome::default();
    for (k, c) in params.iter().zip(&certs) {
        o.lines.push(format!(
            "trap-certify a={} lambda={} betas={} largest_r={} {}",
            k.spin(),
            c.lambda,
            c.beta_samples.len(),
            c.largest_r_passing,
            status(c.passed)
        ));
        o.check(format!("certificate a={}", k.spin()), c.passed, c.reasons.join("; "));
    }
    let bytes = if config.a_list.is_some() { to_json(&certs)? } else { to_json(&certs[0])? };
    o.artifacts.push(("certificate.json".into(), bytes));
    Ok(o)
}

fn escape_check(config: &RunConfig) -> Result<Outcome, RunError> {
    match config.escape.model {
        EscapeModel::Toy => {
            let pair = build_defining_pair(ToyBarrier, SaddlePoint { x: 0.0, xi: 0.0 })?;
            escape_for(config, &pair, "toy")
        }
        EscapeModel::Kerr => {
            let beta = betas(config, 0.0)?[0];
            let chart = linearization(beta, &config.kerr)?;
            let pair = build_defining_pair(ReducedKerr::new(config.kerr, beta), &chart)?;
            escape_for(config, &pair, "kerr")
        }
    }
}

pub const DEFAULT_ESCAPE_H: [f64; 3] = [1e-2, 1e-3, 1e-4];
const G1_GRID: usize = 201;
const BRACKET_GRID: usize = 41;

fn escape_for<M: HamiltonianModel>(config: &RunConfig, pair: &DefiningPair<M>, label: &str) -> Result<Outcome, RunError> {
    let e = &config.escape;
    let hs = config.h_list.clone().unwrap_or_else(|| DEFAULT_ESCAPE_H.to_vec());
    let mut o = Outcome::default();
    let mut violations = Vec::new();
    let mut fail = |o: &mut Outcome, name: String, ok: bool, detail: String| {
        if !ok {
            violations.push(format!("{name}: {detail}"));
        }
        o.check(name, ok, detail);
    };

    let defg = verify_defg_relations(pair, &disc_grid(pair, e.bracket_radius, BRACKET_GRID), 1e-12);
    fail(
        &mut o,
        "defining-function relations".into(),
        defg.passed,
        format!("{} sign violations, min bracket {}", defg.violations, defg.min_bracket),
    );
    let (g1, g1_report) = build_g1(pair, e.u_radius, e.v_radius, e.delta, G1_GRID)?;
    fail(&mut o, "exterior escape function".into(), g1_report.passed, format!("floor {}", g1_report.floor));

    let s = pair.saddle;
    let saddle_value = pair.c(0, s.x, s.xi) * pair.c(1, s.x, s.xi) * pair.c0;
    let grid = disc_grid(pair, e.grid_radius, e.grid_n);
    let samples = sample_pairs(pair, e.order_radius, e.order_samples, config.seed);
    let mut bounds = Vec::with_capacity(hs.len());
    let mut tables = Vec::with_capacity(hs.len());
    for &h in &hs {
        let spec = EscapeSpec { htilde: e.htilde, c1: e.c1, m_const: e.m_const, ..EscapeSpec::new(h, g1) };
        let ef = build_escape(spec, pair)?;
        let at_saddle = ef.phi_tilde(s.x, s.xi);
        fail(
            &mut o,
            format!("saddle value h={h}"),
            (at_saddle - saddle_value).abs() <= 1e-10 * saddle_value.abs().max(1.0),
            format!("{at_saddle} vs c+c-{{phi+,phi-}} = {saddle_value}"),
        );
        let c1 = commutator_lower_bound(&spec, pair, &grid)?;
        fail(&mut o, format!("commutator bound h={h}"), c1 > 0.0, format!("c1 = {c1}"));
        bounds.push(c1);
        tables.push(order_function_check(&ef, &samples));
    }
    let mean = bounds.iter().sum::<f64>() / bounds.len() as f64;
    let spread = bounds.iter().map(|b| (b - mean).abs()).fold(0.0, f64::max) / mean.abs();
    fail(
        &mut o,
        "commutator bound stability".into(),
        spread <= config.tolerances.c1_stability,
        format!("relative spread {spread} across h"),
    );
    let (order_c, order_n) = match order_function_sweep(&tables) {
        Ok((c, n)) => {
            fail(&mut o, "order function".into(), n <= 4, format!("N = {n}, C = {c}"));
            (c, n)
        }
        Err(EscapeError::Unbounded) => {
            fail(&mut o, "order function".into(), false, "no N <= 8 bounds the weight ratios".into());
            (f64::INFINITY, u32::MAX)
        }
        Err(err) => return Err(err.into()),
    };
    let report = EscapeReport {
        c1: bounds.iter().copied().fold(f64::INFINITY, f64::min),
        order_c,
        order_n,
        bracket_min: defg.min_bracket,
        g1_floor: g1_report.floor,
        violations,
    };
    let ok = o.passed();
    o.lines.push(format!(
        "escape-check {label} c1={} C={} N={} bracket_min={} {}",
        sci(report.c1),
        sci(report.order_c),
        report.order_n,
        sci(report.bracket_min),
        status(ok)
    ));
    o.artifacts.push(("escape_report.json".into(), to_json(&report)?));
    Ok(o)
}

pub const DEFAULT_SPECTRUM_H: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

fn model_params(config: &RunConfig) -> ModelParams {
    let s = &config.spectrum;
    ModelParams {
        mass: config.kerr.mass(),
        spin: config.kerr.spin(),
        k_ang: s.k_ang,
        beta: s.beta,
        order: s.order,
        resolution: s.resolution,
        ..ModelParams::default()
    }
}

fn gap_options(config: &RunConfig) -> GapOptions {
    let s = &config.spectrum;
    GapOptions {
        window: s.window,
        floor_factor: s.floor_factor,
        method: EigenMethod::Auto,
        dense_cap: s.dense_cap,
        shifts: s.shifts,
        residual_tol: config.tolerances.residual,
        axis: s.axis.clone(),
        seed: config.seed,
    }
}

fn spectrum_gap(config: &RunConfig) -> Result<Outcome, RunError> {
    let kind = config.spectrum.model;
    let hs = config.h_list.clone().unwrap_or_else(|| DEFAULT_SPECTRUM_H.to_vec());
    let sweep = gap_sweep(kind, &model_params(config), &hs, &gap_options(config), config.tolerances.nu)?;
    let mut o = Outcome::default();
    for r in &sweep.reports {
        o.lines.push(format!(
            "spectrum-gap {} h={} n={} eigenvalues={} gap={} nu={} {}",
            kind.name(),
            r.h,
            r.n_points,
            r.eigenvalues.len(),
            sci(r.gap),
            sci(r.nu),
            status(r.gap > 0.0 && !r.window_empty)
        ));
        o.check(format!("gap h={}", r.h), r.gap > 0.0, format!("gap = {}", r.gap));
        if r.window_empty {
            o.check(format!("window h={}", r.h), false, "no eigenvalue above the floor");
        }
    }
    if hs.len() >= 2 {
        o.check(
            "nu between the two smallest h",
            (sweep.nu_ratio - 1.0).abs() <= config.tolerances.nu,
            format!("ratio {}", sweep.nu_ratio),
        );
    }
    let mut gaps = Vec::new();
    write_sweep_csv(&mut gaps, &sweep.rows, config.spectrum.timing)?;
    let mut eigs = Vec::new();
    write_eigenvalues_csv(&mut eigs, &sweep.reports)?;
    o.artifacts.push(("gaps.csv".into(), gaps));
    o.artifacts.push(("eigenvalues.csv".into(), eigs));
    Ok(o)
}

/// Upper-half-plane sample points with `Im z ∈ (0, 0.3]`, `Re z ∈ [−0.3, 0.3]`.
pub fn random_upper_half_plane(n: usize, seed: u64) -> Vec<C64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let re: f64 = rng.random_range(-0.3..=0.3);
            // (0, 0.3]: reflect the half-open [0, 0.3)
            let im: f64 = 0.3 - rng.random_range(0.0..0.3);
            C64::new(re, im)
        })
        .collect()
}

struct ResolventRow {
    h: f64,
    z: C64,
    norm: f64,
}

fn spectrum_resolvent(config: &RunConfig) -> Result<Outcome, RunError> {
    let kind = config.spectrum.model;
    let hs = config.h_list.clone().unwrap_or_else(|| DEFAULT_SPECTRUM_H.to_vec());
    let params = model_params(config);
    let mut points: Vec<C64> = config.spectrum.axis.iter().map(|&x| C64::new(x, 0.0)).collect();
    if !points.contains(&C64::new(0.0, 0.0)) {
        points.insert(0, C64::new(0.0, 0.0));
    }
    let upper = random_upper_half_plane(config.spectrum.random_z, config.seed);
    points.extend(&upper);
    let per_h = hs
        .par_iter()
        .map(|&h| -> Result<Vec<ResolventRow>, RunError> {
            let prob = build_default(kind, &params, h)?;
            prob.validate()?;
            let a = discretize(&prob);
            points
                .iter()
                .map(|&z| {
                    let norm = match resolvent_norm(&a, z) {
                        Ok(n) => n,
                        Err(CapError::SingularMatrix { .. }) => f64::INFINITY,
                        Err(e) => return Err(e.into()),
                    };
                    Ok(ResolventRow { h, z, norm })
                })
                .collect()
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut o = Outcome::default();
    let mut scaled = Vec::new();
    let mut csv = String::from("h,re_z,im_z,norm\n");
    for rows in &per_h {
        let h = rows[0].h;
        let r0 = rows.iter().find(|r| r.z == C64::new(0.0, 0.0)).map(|r| r.norm).unwrap_or(f64::NAN);
        scaled.push(r0 * h / (1.0 / h).ln());
        let mut worst: f64 = 0.0;
        for r in rows {
            csv.push_str(&format!("{},{},{},{}\n", sci(r.h), sci(r.z.re), sci(r.z.im), sci(r.norm)));
            if r.z.im > 0.0 {
                worst = worst.max(r.norm * r.z.im);
            }
        }
        let bound_ok = worst <= 1.0 + 10.0 * f64::EPSILON;
        if !upper.is_empty() {
            o.check(format!("1/Im z bound h={h}"), bound_ok, format!("max norm*Im z = {worst}"));
        }
        o.lines.push(format!(
            "spectrum-resolvent {} h={} norm_z0={} scaled={} {}",
            kind.name(),
            h,
            sci(r0),
            sci(r0 * h / (1.0 / h).ln()),
            status(bound_ok || upper.is_empty())
        ));
    }
    if scaled.len() >= 2 {
        let ratio = scaled.iter().copied().fold(0.0, f64::max) / scaled.iter().copied().fold(f64::INFINITY, f64::min);
        o.check(
            "real-axis resolvent ratio",
            ratio <= config.tolerances.resolvent_ratio,
            format!("max/min of norm(0) h/log(1/h) = {ratio}"),
        );
    }
    o.artifacts.push(("resolvent.csv".into(), csv.into_bytes()));
    Ok(o)
}

/// A null orbit of the rescaled Kerr symbol starting outside the photon
/// sphere with outgoing radial momentum.
pub fn outgoing_orbit(k: &KerrParams, rng: &mut ChaCha8Rng) -> [f64; 6] {
    let a = k.spin();
    let m = k.mass();
    loop {
        let beta: f64 = m * rng.random_range(1.0..5.0) * if rng.random::<bool>() { 1.0 } else { -1.0 };
        let theta: f64 = rng.random_range(1.0..2.1);
        let alpha: f64 = m * rng.random_range(-1.5..1.5);
        let r: f64 = m * rng.random_range(3.5..6.0);
        let sn = theta.sin();
        let carter = alpha * alpha + (a * sn - beta / sn).powi(2);
        let v = RadialPotential::new(*k, beta).value(r);
        if -carter - v > 0.5 * m * m {
            let xi = ((-carter - v) / k.delta(r)).sqrt();
            return [r, theta, rng.random_range(0.0..6.0), xi, alpha, beta];
        }
    }
}

fn flow_integrate(config: &RunConfig) -> Result<Outcome, RunError> {
    let k = config.kerr;
    let model = RescaledKerrModel::new(k);
    let start = match config.flow.start {
        Some(s) => s,
        None => outgoing_orbit(&k, &mut ChaCha8Rng::seed_from_u64(config.seed)),
    };
    if !model.in_chart(&start) {
        return Err(RunError::Numerical("flow.start lies outside the coordinate chart".into()));
    }
    let (t, n, tol) = (config.flow.time, config.flow.samples, config.tolerances.flow);
    let times: Vec<f64> = (1..=n).map(|i| t * i as f64 / n as f64).collect();
    let rows = kerr_orbit_rows(&model, &start, &times, tol)?;
    let full = integrate_flow(&model, &start, t, tol)?;
    let mut o = Outcome::default();
    for (name, d) in model.conserved_names().iter().zip(&full.drift) {
        o.check(format!("drift of {name}"), *d < config.tolerances.drift, format!("{d}"));
    }
    let det = full.jacobian.determinant();
    o.check("Jacobian determinant", (det - 1.0).abs() < config.tolerances.jacobian, format!("det = {det}"));
    let drift = full.drift.iter().copied().fold(0.0, f64::max);
    o.lines.push(format!(
        "flow-integrate a={} T={} steps={} max_drift={} det={} {}",
        k.spin(),
        t,
        full.steps,
        sci(drift),
        sci(det),
        status(o.passed())
    ));
    let mut csv = Vec::new();
    write_orbit_csv(&mut csv, &rows)?;
    o.artifacts.push(("orbit.csv".into(), csv));
    Ok(o)
}

#[derive(Serialize)]
struct PerturbEntry {
    seed: u64,
    epsilon: f64,
    #[serde(flatten)]
    report: trapping_certifier::PerturbationReport,
}

fn perturb(config: &RunConfig) -> Result<Outcome, RunError> {
    let seeds = config.perturb.seeds.clone().unwrap_or_else(|| vec![config.seed, config.seed.wrapping_add(1)]);
    let eps = config.perturb.epsilon;
    let opts = certify_options(config);
    let reports = seeds
        .par_iter()
        .map(|&s| perturb_and_recertify_with(&config.kerr, config.perturb.lambda, eps, s, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    let mut o = Outcome::default();
    let mut entries = Vec::new();
    for (&seed, rep) in seeds.iter().zip(reports) {
        let t = &config.tolerances;
        let disp_ok = rep.displacement <= t.displacement * eps.abs();
        let shift_ok = rep.exponent_shift <= t.exponent_shift;
        o.check(format!("certificate seed={seed}"), rep.certificate.passed, rep.certificate.reasons.join("; "));
        o.check(format!("displacement seed={seed}"), disp_ok, format!("{} (K = {})", rep.displacement, rep.constant_k));
        o.check(format!("exponent shift seed={seed}"), shift_ok, format!("{}", rep.exponent_shift));
        o.lines.push(format!(
            "perturb seed={seed} epsilon={eps} displacement={} exponent_shift={} {}",
            sci(rep.displacement),
            sci(rep.exponent_shift),
            status(rep.certificate.passed && disp_ok && shift_ok)
        ));
        entries.push(PerturbEntry { seed, epsilon: eps, report: rep });
    }
    o.artifacts.push(("certificate.json".into(), to_json(&entries)?));
    Ok(o)
}
