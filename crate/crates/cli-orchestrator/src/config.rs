//! Line-oriented `key = value` configuration with dotted keys.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use cap_spectrum::ModelKind;
use kerr_geometry::KerrParams;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{key}: {message}")]
    Validation { key: String, message: String },
}

impl ConfigError {
    fn invalid(key: &str, message: impl Into<String>) -> Self {
        ConfigError::Validation { key: key.to_string(), message: message.into() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    TrapFind,
    TrapCertify,
    EscapeCheck,
    SpectrumGap,
    SpectrumResolvent,
    FlowIntegrate,
    Perturb,
}

impl Command {
    pub const ALL: [Command; 7] = [
        Command::TrapFind,
        Command::TrapCertify,
        Command::EscapeCheck,
        Command::SpectrumGap,
        Command::SpectrumResolvent,
        Command::FlowIntegrate,
        Command::Perturb,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::TrapFind => "trap-find",
            Command::TrapCertify => "trap-certify",
            Command::EscapeCheck => "escape-check",
            Command::SpectrumGap => "spectrum-gap",
            Command::SpectrumResolvent => "spectrum-resolvent",
            Command::FlowIntegrate => "flow-integrate",
            Command::Perturb => "perturb",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Command::ALL.into_iter().find(|c| c.name() == s).ok_or_else(|| format!("unknown command '{s}'"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EscapeModel {
    Toy,
    Kerr,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tolerances {
    /// Local error tolerance of the flow integrator.
    pub flow: f64,
    /// Allowed drift of each conserved quantity.
    pub drift: f64,
    /// Allowed `|det dφᵗ − 1|`.
    pub jacobian: f64,
    /// Eigenpair residual.
    pub residual: f64,
    /// Allowed relative change of `ν` between the two smallest `h`.
    pub nu: f64,
    /// Allowed max/min of `‖R(0)‖·h/log(1/h)` across the sweep.
    pub resolvent_ratio: f64,
    /// Saddle displacement allowed per unit `ε`.
    pub displacement: f64,
    /// Allowed relative exponent shift under perturbation.
    pub exponent_shift: f64,
    /// Allowed relative spread of the commutator bound across `h`.
    pub c1_stability: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            flow: 1e-10,
            drift: 1e-9,
            jacobian: 1e-6,
            residual: 1e-8,
            nu: 0.15,
            resolvent_ratio: 3.0,
            displacement: 5.0,
            exponent_shift: 0.05,
            c1_stability: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrapSection {
    pub lambda: f64,
    pub horizon: f64,
    pub n_beta: usize,
    pub r_max: usize,
}

impl Default for TrapSection {
    fn default() -> Self {
        Self { lambda: 0.0, horizon: 50.0, n_beta: 9, r_max: 4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeSection {
    pub model: EscapeModel,
    pub htilde: f64,
    pub m_const: f64,
    pub c1: f64,
    pub u_radius: f64,
    pub v_radius: f64,
    pub delta: f64,
    /// Disc on which the defining-function relations are checked.
    pub bracket_radius: f64,
    /// Disc and resolution of the commutator grid.
    pub grid_radius: f64,
    pub grid_n: usize,
    pub order_radius: f64,
    pub order_samples: usize,
}

impl Default for EscapeSection {
    fn default() -> Self {
        Self {
            model: EscapeModel::Kerr,
            htilde: 0.25,
            m_const: 5.0,
            c1: 10.0,
            u_radius: 0.1,
            v_radius: 0.2,
            delta: 0.02,
            bracket_radius: 0.05,
            grid_radius: 0.3,
            grid_n: 61,
            order_radius: 0.1,
            order_samples: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSection {
    pub model: ModelKind,
    pub k_ang: Option<f64>,
    pub beta: Option<f64>,
    pub order: usize,
    pub resolution: f64,
    pub window: f64,
    pub floor_factor: f64,
    pub dense_cap: usize,
    pub shifts: usize,
    /// Real points where the resolvent norm is sampled.
    pub axis: Vec<f64>,
    /// Number of random upper-half-plane points for the `1/Im z` check.
    pub random_z: usize,
    /// Write measured runtimes into gaps.csv (breaks byte-determinism).
    pub timing: bool,
}

impl Default for SpectrumSection {
    fn default() -> Self {
        Self {
            model: ModelKind::SchwRadial,
            k_ang: None,
            beta: None,
            order: 4,
            resolution: 10.0,
            window: 0.3,
            floor_factor: 1.5,
            dense_cap: 4000,
            shifts: 12,
            axis: vec![-0.2, -0.1, 0.0, 0.1, 0.2],
            random_z: 50,
            timing: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowSection {
    /// `(r, θ, φ, ξ, α, β)`; a seeded outgoing null orbit when absent.
    pub start: Option<[f64; 6]>,
    pub time: f64,
    pub samples: usize,
}

impl Default for FlowSection {
    fn default() -> Self {
        Self { start: None, time: 100.0, samples: 200 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PerturbSection {
    pub epsilon: f64,
    pub lambda: f64,
    /// Seeds of the perturbation patterns; `seed` and `seed + 1` when absent.
    pub seeds: Option<Vec<u64>>,
}

impl Default for PerturbSection {
    fn default() -> Self {
        Self { epsilon: 0.01, lambda: 0.0, seeds: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub command: Option<Command>,
    #[serde(skip)]
    pub kerr: KerrParams,
    pub h_list: Option<Vec<f64>>,
    pub beta_list: Option<Vec<f64>>,
    pub a_list: Option<Vec<f64>>,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub workers: usize,
    pub output_dir: PathBuf,
    pub trap: TrapSection,
    pub escape: EscapeSection,
    pub spectrum: SpectrumSection,
    pub flow: FlowSection,
    pub perturb: PerturbSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            command: None,
            kerr: KerrParams::schwarzschild(1.0),
            h_list: None,
            beta_list: None,
            a_list: None,
            tolerances: Tolerances::default(),
            seed: 0,
            workers: default_workers(),
            output_dir: PathBuf::from("out"),
            trap: TrapSection::default(),
            escape: EscapeSection::default(),
            spectrum: SpectrumSection::default(),
            flow: FlowSection::default(),
            perturb: PerturbSection::default(),
        }
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

/// Raw value with the line it came from.
struct Entry {
    line: usize,
    value: String,
}

fn parse_error(line: usize, message: impl Into<String>) -> ConfigError {
    ConfigError::Parse { line, message: message.into() }
}

fn scalar<T: FromStr>(key: &str, e: &Entry, what: &str) -> Result<T, ConfigError> {
    e.value.parse().map_err(|_| parse_error(e.line, format!("{key}: expected {what}, got '{}'", e.value)))
}

fn real(key: &str, e: &Entry) -> Result<f64, ConfigError> {
    let v: f64 = scalar(key, e, "a real number")?;
    if !v.is_finite() {
        return Err(parse_error(e.line, format!("{key}: value must be finite")));
    }
    Ok(v)
}

fn list<T: FromStr>(key: &str, e: &Entry, what: &str) -> Result<Vec<T>, ConfigError> {
    e.value
        .split(',')
        .map(|s| s.trim())
        .map(|s| s.parse().map_err(|_| parse_error(e.line, format!("{key}: expected a list of {what}, got '{s}'"))))
        .collect()
}

fn reals(key: &str, e: &Entry) -> Result<Vec<f64>, ConfigError> {
    let v: Vec<f64> = list(key, e, "real numbers")?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(parse_error(e.line, format!("{key}: values must be finite")));
    }
    Ok(v)
}

fn boolean(key: &str, e: &Entry) -> Result<bool, ConfigError> {
    match e.value.as_str() {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(parse_error(e.line, format!("{key}: expected true or false, got '{other}'"))),
    }
}

fn split_lines(text: &str) -> Result<BTreeMap<String, Entry>, ConfigError> {
    let mut out: BTreeMap<String, Entry> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| parse_error(line, "expected 'key = value'"))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || !key.split('.').all(|p| !p.is_empty() && p.chars().all(|c| c.is_ascii_alphanumeric() || c == '_')) {
            return Err(parse_error(line, format!("malformed key '{key}'")));
        }
        if value.is_empty() {
            return Err(parse_error(line, format!("{key}: missing value")));
        }
        if let Some(prev) = out.get(key) {
            return Err(parse_error(line, format!("{key}: duplicate key (first set on line {})", prev.line)));
        }
        out.insert(key.to_string(), Entry { line, value: value.to_string() });
    }
    Ok(out)
}

/// Parses and validates a configuration; every key not listed here is an error.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let entries = split_lines(text)?;
    let mut c = RunConfig::default();
    let (mut mass, mut spin) = (1.0, 0.0);
    for (key, e) in &entries {
        let k = key.as_str();
        match k {
            "command" => c.command = Some(e.value.parse().map_err(|m: String| parse_error(e.line, m))?),
            "kerr.mass" => mass = real(k, e)?,
            "kerr.spin" => spin = real(k, e)?,
            "h_list" => c.h_list = Some(reals(k, e)?),
            "beta_list" => c.beta_list = Some(reals(k, e)?),
            "a_list" => c.a_list = Some(reals(k, e)?),
            "seed" => c.seed = scalar(k, e, "a non-negative integer")?,
            "workers" => c.workers = scalar(k, e, "a positive integer")?,
            "output_dir" => c.output_dir = PathBuf::from(&e.value),
            "tolerances.flow" => c.tolerances.flow = real(k, e)?,
            "tolerances.drift" => c.tolerances.drift = real(k, e)?,
            "tolerances.jacobian" => c.tolerances.jacobian = real(k, e)?,
            "tolerances.residual" => c.tolerances.residual = real(k, e)?,
            "tolerances.nu" => c.tolerances.nu = real(k, e)?,
            "tolerances.resolvent_ratio" => c.tolerances.resolvent_ratio = real(k, e)?,
            "tolerances.displacement" => c.tolerances.displacement = real(k, e)?,
            "tolerances.exponent_shift" => c.tolerances.exponent_shift = real(k, e)?,
            "tolerances.c1_stability" => c.tolerances.c1_stability = real(k, e)?,
            "trap.lambda" => c.trap.lambda = real(k, e)?,
            "trap.horizon" => c.trap.horizon = real(k, e)?,
            "trap.n_beta" => c.trap.n_beta = scalar(k, e, "a positive integer")?,
            "trap.r_max" => c.trap.r_max = scalar(k, e, "a positive integer")?,
            "escape.model" => {
                c.escape.model = match e.value.as_str() {
                    "toy" => EscapeModel::Toy,
                    "kerr" => EscapeModel::Kerr,
                    other => return Err(parse_error(e.line, format!("{k}: expected toy or kerr, got '{other}'"))),
                }
            }
            "escape.htilde" => c.escape.htilde = real(k, e)?,
            "escape.m_const" => c.escape.m_const = real(k, e)?,
            "escape.c1" => c.escape.c1 = real(k, e)?,
            "escape.u_radius" => c.escape.u_radius = real(k, e)?,
            "escape.v_radius" => c.escape.v_radius = real(k, e)?,
            "escape.delta" => c.escape.delta = real(k, e)?,
            "escape.bracket_radius" => c.escape.bracket_radius = real(k, e)?,
            "escape.grid_radius" => c.escape.grid_radius = real(k, e)?,
            "escape.grid_n" => c.escape.grid_n = scalar(k, e, "a positive integer")?,
            "escape.order_radius" => c.escape.order_radius = real(k, e)?,
            "escape.order_samples" => c.escape.order_samples = scalar(k, e, "a positive integer")?,
            "spectrum.model" => c.spectrum.model = e.value.parse().map_err(|err| parse_error(e.line, format!("{k}: {err}")))?,
            "spectrum.k_ang" => c.spectrum.k_ang = Some(real(k, e)?),
            "spectrum.beta" => c.spectrum.beta = Some(real(k, e)?),
            "spectrum.order" => c.spectrum.order = scalar(k, e, "2 or 4")?,
            "spectrum.resolution" => c.spectrum.resolution = real(k, e)?,
            "spectrum.window" => c.spectrum.window = real(k, e)?,
            "spectrum.floor_factor" => c.spectrum.floor_factor = real(k, e)?,
            "spectrum.dense_cap" => c.spectrum.dense_cap = scalar(k, e, "a non-negative integer")?,
            "spectrum.shifts" => c.spectrum.shifts = scalar(k, e, "a positive integer")?,
            "spectrum.axis" => c.spectrum.axis = reals(k, e)?,
            "spectrum.random_z" => c.spectrum.random_z = scalar(k, e, "a non-negative integer")?,
            "spectrum.timing" => c.spectrum.timing = boolean(k, e)?,
            "flow.start" => {
                let v = reals(k, e)?;
                let arr: [f64; 6] =
                    v.try_into().map_err(|_| parse_error(e.line, format!("{k}: expected six values r, theta, phi, xi, alpha, beta")))?;
                c.flow.start = Some(arr);
            }
            "flow.time" => c.flow.time = real(k, e)?,
            "flow.samples" => c.flow.samples = scalar(k, e, "a positive integer")?,
            "perturb.epsilon" => c.perturb.epsilon = real(k, e)?,
            "perturb.lambda" => c.perturb.lambda = real(k, e)?,
            "perturb.seeds" => c.perturb.seeds = Some(list(k, e, "non-negative integers")?),
            _ => return Err(ConfigError::invalid(k, format!("unknown key (line {})", e.line))),
        }
    }
    c.kerr = KerrParams::new(mass, spin).map_err(|err| {
        let key = if mass > 0.0 { "kerr.spin" } else { "kerr.mass" };
        ConfigError::invalid(key, err.to_string())
    })?;
    validate(&c)?;
    Ok(c)
}

fn positive(key: &str, v: f64) -> Result<(), ConfigError> {
    if v > 0.0 {
        Ok(())
    } else {
        Err(ConfigError::invalid(key, format!("must be positive, got {v}")))
    }
}

pub fn validate(c: &RunConfig) -> Result<(), ConfigError> {
    let t = &c.tolerances;
    for (k, v) in [
        ("tolerances.flow", t.flow),
        ("tolerances.drift", t.drift),
        ("tolerances.jacobian", t.jacobian),
        ("tolerances.residual", t.residual),
        ("tolerances.nu", t.nu),
        ("tolerances.resolvent_ratio", t.resolvent_ratio),
        ("tolerances.displacement", t.displacement),
        ("tolerances.exponent_shift", t.exponent_shift),
        ("tolerances.c1_stability", t.c1_stability),
    ] {
        positive(k, v)?;
    }
    if let Some(h) = &c.h_list {
        if h.is_empty() {
            return Err(ConfigError::invalid("h_list", "empty list"));
        }
        if h.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(ConfigError::invalid("h_list", "must be strictly descending"));
        }
        if h.iter().any(|&x| !(x > 0.0 && x < 0.5)) {
            return Err(ConfigError::invalid("h_list", "values must lie in (0, 0.5)"));
        }
    }
    if let Some(a) = &c.a_list {
        for &s in a {
            KerrParams::new(c.kerr.mass(), s).map_err(|err| ConfigError::invalid("a_list", err.to_string()))?;
        }
    }
    if c.workers == 0 {
        return Err(ConfigError::invalid("workers", "must be at least 1"));
    }
    positive("trap.horizon", c.trap.horizon)?;
    if c.trap.n_beta == 0 || c.trap.r_max == 0 {
        return Err(ConfigError::invalid(if c.trap.n_beta == 0 { "trap.n_beta" } else { "trap.r_max" }, "must be at least 1"));
    }
    let e = &c.escape;
    for (k, v) in [
        ("escape.htilde", e.htilde),
        ("escape.m_const", e.m_const),
        ("escape.u_radius", e.u_radius),
        ("escape.v_radius", e.v_radius),
        ("escape.delta", e.delta),
        ("escape.bracket_radius", e.bracket_radius),
        ("escape.grid_radius", e.grid_radius),
        ("escape.order_radius", e.order_radius),
    ] {
        positive(k, v)?;
    }
    if !(e.htilde < 1.0) {
        return Err(ConfigError::invalid("escape.htilde", "must lie in (0, 1)"));
    }
    if e.c1 < 0.0 {
        return Err(ConfigError::invalid("escape.c1", "must be non-negative"));
    }
    if !(e.u_radius < e.v_radius) {
        return Err(ConfigError::invalid("escape.u_radius", "must be smaller than escape.v_radius"));
    }
    if let Some(h) = &c.h_list {
        if c.command == Some(Command::EscapeCheck) && h.iter().any(|&x| x >= e.htilde) {
            return Err(ConfigError::invalid("h_list", "escape-check needs every h below escape.htilde"));
        }
    }
    let s = &c.spectrum;
    if s.order != 2 && s.order != 4 {
        return Err(ConfigError::invalid("spectrum.order", "must be 2 or 4"));
    }
    positive("spectrum.resolution", s.resolution)?;
    positive("spectrum.window", s.window)?;
    positive("spectrum.floor_factor", s.floor_factor)?;
    if s.shifts == 0 {
        return Err(ConfigError::invalid("spectrum.shifts", "must be at least 1"));
    }
    if let Some(k) = s.k_ang {
        positive("spectrum.k_ang", k)?;
    }
    positive("flow.time", c.flow.time)?;
    if c.flow.samples == 0 {
        return Err(ConfigError::invalid("flow.samples", "must be at least 1"));
    }
    if !(c.perturb.epsilon.abs() <= 0.05) {
        return Err(ConfigError::invalid("perturb.epsilon", "must satisfy |epsilon| <= 0.05"));
    }
    Ok(())
}
