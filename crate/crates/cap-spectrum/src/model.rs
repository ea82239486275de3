//! Reduced 1D barrier models sampled on a grid with an absorbing layer.

use std::fmt;
use std::str::FromStr;

use kerr_geometry::KerrParams;
use serde::Serialize;

use crate::CapError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// `−h²∂² + sech²x − 1`.
    ToySech2,
    /// Schwarzschild radial operator in the tortoise coordinate.
    SchwRadial,
    /// Equatorial Kerr radial operator at fixed `β`, in the Kerr tortoise coordinate.
    KerrEquatorial,
}

impl ModelKind {
    pub fn name(&self) -> &'static str {
        match self {
            ModelKind::ToySech2 => "toy_sech2",
            ModelKind::SchwRadial => "schw_radial",
            ModelKind::KerrEquatorial => "kerr_equatorial",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = CapError;
    fn from_str(s: &str) -> Result<Self, CapError> {
        match s {
            "toy_sech2" => Ok(ModelKind::ToySech2),
            "schw_radial" => Ok(ModelKind::SchwRadial),
            "kerr_equatorial" => Ok(ModelKind::KerrEquatorial),
            other => Err(CapError::InvalidProblem(format!("unknown model kind '{other}'"))),
        }
    }
}

/// Absorber layout as fractions of the domain length at each end: `W ≡ 1` on
/// the outer `plateau`, then a quintic smoothstep down to zero over `ramp`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbsorberShape {
    pub plateau: f64,
    pub ramp: f64,
}

impl Default for AbsorberShape {
    fn default() -> Self {
        Self { plateau: 0.1, ramp: 0.2 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelParams {
    pub mass: f64,
    /// Used by `kerr_equatorial` only.
    pub spin: f64,
    /// Angular constant of `schw_radial`; defaults to `27M²`.
    pub k_ang: Option<f64>,
    /// `β` of `kerr_equatorial`; defaults to the positive equatorial critical value.
    pub beta: Option<f64>,
    /// Stencil order, 2 or 4.
    pub order: usize,
    /// Minimum grid points per unit `(x_max − x_min)/h`.
    pub resolution: f64,
    pub absorber: AbsorberShape,
}

impl Default for ModelParams {
    fn default() -> Self {
        Self { mass: 1.0, spin: 0.0, k_ang: None, beta: None, order: 4, resolution: 10.0, absorber: AbsorberShape::default() }
    }
}

/// Uniform grid of `n_points` interior nodes; the endpoints carry Dirichlet conditions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid {
    pub x_min: f64,
    pub x_max: f64,
    pub n_points: usize,
}

impl Grid {
    pub fn length(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn dx(&self) -> f64 {
        self.length() / (self.n_points + 1) as f64
    }

    /// Interior node `i` (0-based).
    pub fn node(&self, i: usize) -> f64 {
        self.x_min + (i + 1) as f64 * self.dx()
    }

    /// Midpoint between nodes `j − 1` and `j`, `j = 0..=n` (node `−1` is `x_min`).
    pub fn midpoint(&self, j: usize) -> f64 {
        self.x_min + (j as f64 + 0.5) * self.dx()
    }
}

pub fn default_domain(kind: ModelKind, mass: f64) -> (f64, f64) {
    match kind {
        ModelKind::ToySech2 => (-6.0, 6.0),
        ModelKind::SchwRadial | ModelKind::KerrEquatorial => (-30.0 * mass, 40.0 * mass),
    }
}

/// The default domain with the smallest admissible number of points.
pub fn resolved_grid(kind: ModelKind, params: &ModelParams, h: f64) -> Grid {
    let (x_min, x_max) = default_domain(kind, params.mass);
    let n_points = (params.resolution * (x_max - x_min) / h).ceil() as usize;
    Grid { x_min, x_max, n_points }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CapProblem {
    pub kind: ModelKind,
    pub h: f64,
    pub grid: Grid,
    pub order: usize,
    pub potential: Vec<f64>,
    pub absorber: Vec<f64>,
    /// Principal coefficient at the `n + 1` cell midpoints.
    pub mass_weight: Vec<f64>,
    /// Grid coordinate of the barrier top.
    pub barrier_top: f64,
}

impl CapProblem {
    pub fn n(&self) -> usize {
        self.grid.n_points
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.grid.node(i)).collect()
    }

    pub fn validate(&self) -> Result<(), CapError> {
        let n = self.n();
        if self.potential.len() != n || self.absorber.len() != n || self.mass_weight.len() != n + 1 {
            return Err(CapError::InvalidProblem("sample lengths do not match the grid".into()));
        }
        if !(self.h > 0.0 && self.h < 0.5) {
            return Err(CapError::InvalidProblem(format!("h = {} outside (0, 0.5)", self.h)));
        }
        if self.order != 2 && self.order != 4 {
            return Err(CapError::InvalidProblem(format!("stencil order {} (expected 2 or 4)", self.order)));
        }
        if self.absorber.iter().any(|w| !(*w >= 0.0 && *w <= 1.0)) {
            return Err(CapError::InvalidProblem("absorber outside [0, 1]".into()));
        }
        if self.mass_weight.iter().any(|m| !(*m > 0.0)) || self.potential.iter().any(|v| !v.is_finite()) {
            return Err(CapError::InvalidProblem("non-positive mass weight or non-finite potential".into()));
        }
        let margin = ((0.1 * n as f64).floor() as usize).max(1);
        let full = |i: usize| self.absorber[i] == 1.0;
        if !((0..margin).all(full) && (n - margin..n).all(full)) {
            return Err(CapError::InvalidProblem("absorber is not 1 on a 10% margin at each end".into()));
        }
        let i_top = ((self.barrier_top - self.grid.x_min) / self.grid.dx()).round() as isize - 1;
        if i_top < 0 || i_top as usize >= n || self.absorber[i_top as usize] != 0.0 {
            return Err(CapError::InvalidProblem(format!("barrier top x = {} is not in the region W = 0", self.barrier_top)));
        }
        Ok(())
    }
}

fn smoothstep5(t: f64) -> f64 {
    let t = t.clamp(0.0, 1.0);
    t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
}

/// Absorber profile on `[x_min, x_max]`.
pub fn absorber_profile(shape: &AbsorberShape, x_min: f64, x_max: f64, x: f64) -> f64 {
    let len = x_max - x_min;
    let lp = x_min + shape.plateau * len;
    let lr = x_min + (shape.plateau + shape.ramp) * len;
    let rp = x_max - shape.plateau * len;
    let rr = x_max - (shape.plateau + shape.ramp) * len;
    if x < lr {
        smoothstep5((lr - x) / (lr - lp))
    } else if x > rr {
        smoothstep5((x - rr) / (rp - rr))
    } else {
        0.0
    }
}

/// The effective radial operator `(Δ/r⁴)·p` on the equator of Kerr at fixed
/// `β` with `𝒦 = (a − β)²`: potential `V = F/r⁴`, `F = Δ·s − N` where
/// `N = a²β² + 4Maβr + (r² + a²)²` and `s = a² + β²`. Schwarzschild with
/// angular constant `k` is `a = 0`, `s = k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialBarrier {
    pub mass: f64,
    pub spin: f64,
    pub beta: f64,
    pub s: f64,
}

impl RadialBarrier {
    pub fn schwarzschild(mass: f64, k_ang: f64) -> Self {
        Self { mass, spin: 0.0, beta: k_ang.sqrt(), s: k_ang }
    }

    pub fn kerr(mass: f64, spin: f64, beta: f64) -> Self {
        Self { mass, spin, beta, s: spin * spin + beta * beta }
    }

    fn horizons(&self) -> (f64, f64) {
        let k = KerrParams::new(self.mass, self.spin).expect("validated parameters");
        (k.horizon_radius(), k.inner_horizon_radius())
    }

    /// `F, F′, F″` from `u = r − r₊` (keeps `Δ` accurate at the horizon).
    fn f_jet(&self, u: f64) -> (f64, f64, f64) {
        let (rp, rm) = self.horizons();
        let (m, a, b) = (self.mass, self.spin, self.beta);
        let r = rp + u;
        let d = u * (u + rp - rm);
        let d1 = 2.0 * (r - m);
        let sum = r * r + a * a;
        let n = a * a * b * b + 4.0 * m * a * b * r + sum * sum;
        let n1 = 4.0 * m * a * b + 4.0 * r * sum;
        let n2 = 12.0 * r * r + 4.0 * a * a;
        (d * self.s - n, d1 * self.s - n1, 2.0 * self.s - n2)
    }

    /// `V, V′, V″` in the areal radius.
    pub fn potential_r(&self, r: f64) -> (f64, f64, f64) {
        let (rp, _) = self.horizons();
        let (f, f1, f2) = self.f_jet(r - rp);
        let r4 = r.powi(4);
        (f / r4, f1 / r4 - 4.0 * f / (r4 * r), f2 / r4 - 8.0 * f1 / (r4 * r) + 20.0 * f / (r4 * r * r))
    }

    /// Principal coefficient `Δ²/r⁴` in the areal radius.
    pub fn mass_weight_r(&self, r: f64) -> f64 {
        let k = KerrParams::new(self.mass, self.spin).expect("validated parameters");
        let d = k.delta(r);
        d * d / r.powi(4)
    }

    /// Principal coefficient `(r² + a²)²/r⁴` in the tortoise coordinate.
    pub fn mass_weight_x(&self, r: f64) -> f64 {
        let s = r * r + self.spin * self.spin;
        s * s / r.powi(4)
    }

    /// Tortoise coordinate `x(r)`, `dx/dr = (r² + a²)/Δ`, as a function of `u = r − r₊`.
    fn tortoise_u(&self, u: f64) -> f64 {
        let (rp, rm) = self.horizons();
        let m2 = 2.0 * self.mass;
        let gap = rp - rm;
        let mut x = rp + u + (m2 * rp / gap) * (u / m2).ln();
        if rm > 0.0 {
            x -= (m2 * rm / gap) * ((u + gap) / m2).ln();
        }
        x
    }

    pub fn tortoise(&self, r: f64) -> f64 {
        let (rp, _) = self.horizons();
        self.tortoise_u(r - rp)
    }

    /// Inverse of the tortoise map, returned as `u = r − r₊`.
    pub fn areal_offset(&self, x: f64) -> f64 {
        let (rp, rm) = self.horizons();
        let gap = rp - rm;
        // Newton in s = ln u, safeguarded by a bracket
        let (mut lo, mut hi) = (-740.0f64, (x.abs() + 10.0 * self.mass).ln() + 1.0);
        let a_coef = 2.0 * self.mass * rp / gap;
        let mut s = if x > rp + 4.0 * self.mass { x.ln() } else { ((x - rp) / a_coef + (2.0 * self.mass).ln()).clamp(lo, hi) };
        for _ in 0..200 {
            let u = s.exp();
            let g = self.tortoise_u(u) - x;
            if g > 0.0 {
                hi = s;
            } else {
                lo = s;
            }
            let r = rp + u;
            let dg = (r * r + self.spin * self.spin) / (u + gap);
            let mut next = s - g / dg;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - s).abs() < 1e-15 * s.abs().max(1.0) {
                s = next;
                break;
            }
            s = next;
        }
        s.exp()
    }

    /// Potential in the tortoise coordinate, from `u = r − r₊`.
    pub fn potential_u(&self, u: f64) -> f64 {
        let (rp, _) = self.horizons();
        self.f_jet(u).0 / (rp + u).powi(4)
    }

    /// Barrier top in the areal radius, by Newton on `V′ = 0` from `3M`.
    pub fn barrier_top_r(&self) -> Result<f64, CapError> {
        let (rp, _) = self.horizons();
        let (mut lo, mut hi) = (rp * (1.0 + 1e-6), 20.0 * self.mass);
        if !(self.potential_r(lo).1 > 0.0 && self.potential_r(hi).1 < 0.0) {
            return Err(CapError::InvalidProblem("radial potential has no barrier top".into()));
        }
        let mut r = 3.0 * self.mass;
        for _ in 0..200 {
            let (_, v1, v2) = self.potential_r(r);
            if v1 > 0.0 {
                lo = r;
            } else {
                hi = r;
            }
            let mut next = r - v1 / v2;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - r).abs() <= 4.0 * f64::EPSILON * r {
                return Ok(next);
            }
            r = next;
        }
        Ok(r)
    }
}

fn radial_barrier(kind: ModelKind, params: &ModelParams) -> Result<RadialBarrier, CapError> {
    let m = params.mass;
    match kind {
        ModelKind::ToySech2 => Err(CapError::InvalidProblem("toy model has no radial barrier".into())),
        ModelKind::SchwRadial => {
            let k = params.k_ang.unwrap_or(27.0 * m * m);
            if !(k > 0.0) {
                return Err(CapError::InvalidProblem(format!("k_ang = {k} must be positive")));
            }
            Ok(RadialBarrier::schwarzschild(m, k))
        }
        ModelKind::KerrEquatorial => {
            let k = KerrParams::new(m, params.spin)?;
            let beta = match params.beta {
                Some(b) => b,
                None => {
                    let crit = trapping_certifier::beta_critical_points(0.0, &k)?;
                    crit.iter().map(|c| c.beta).fold(f64::NEG_INFINITY, f64::max)
                }
            };
            Ok(RadialBarrier::kerr(m, params.spin, beta))
        }
    }
}

/// The saddle of the effective symbol `m(x)ξ² + V(x)` at the barrier top.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleExponent {
    /// Barrier top in the model's physical coordinate (areal radius for radial models).
    pub position: f64,
    pub value: f64,
    /// Principal coefficient at the top, in the same coordinate.
    pub mass_weight: f64,
    pub curvature: f64,
    /// `√(2m·(−V″))`, the expansion rate of `H_p` at the saddle.
    pub mu_eff: f64,
}

/// The model's own linearization at its barrier top.
pub fn saddle_exponent(kind: ModelKind, params: &ModelParams) -> Result<SaddleExponent, CapError> {
    let (position, value, m, v2) = match kind {
        ModelKind::ToySech2 => (0.0, 0.0, 1.0, -2.0),
        _ => {
            let b = radial_barrier(kind, params)?;
            let r = b.barrier_top_r()?;
            let (v, _, v2) = b.potential_r(r);
            (r, v, b.mass_weight_r(r), v2)
        }
    };
    if !(v2 < 0.0) {
        return Err(CapError::InvalidProblem("barrier top is not a nondegenerate maximum".into()));
    }
    Ok(SaddleExponent { position, value, mass_weight: m, curvature: v2, mu_eff: (2.0 * m * -v2).sqrt() })
}

fn check_params(h: f64, params: &ModelParams) -> Result<(), CapError> {
    if !(h > 0.0 && h < 0.5) {
        return Err(CapError::InvalidProblem(format!("h = {h} outside (0, 0.5)")));
    }
    if !(params.mass > 0.0) {
        return Err(CapError::InvalidProblem(format!("mass = {} must be positive", params.mass)));
    }
    if !(params.resolution > 0.0) {
        return Err(CapError::InvalidProblem("resolution factor must be positive".into()));
    }
    let s = params.absorber;
    if !(s.plateau >= 0.1 && s.ramp > 0.0 && s.plateau + s.ramp < 0.5) {
        return Err(CapError::InvalidProblem(format!("absorber layout plateau={} ramp={}", s.plateau, s.ramp)));
    }
    Ok(())
}

pub fn build_model(kind: ModelKind, params: &ModelParams, h: f64, grid: Grid) -> Result<CapProblem, CapError> {
    check_params(h, params)?;
    if !(grid.x_max > grid.x_min) || grid.n_points < 8 {
        return Err(CapError::InvalidProblem("degenerate grid".into()));
    }
    let required = (params.resolution * grid.length() / h).ceil() as usize;
    if grid.n_points < required {
        return Err(CapError::UnderResolved { n_points: grid.n_points, required });
    }
    let n = grid.n_points;
    let absorber: Vec<f64> =
        (0..n).map(|i| absorber_profile(&params.absorber, grid.x_min, grid.x_max, grid.node(i))).collect();
    let (potential, mass_weight, barrier_top) = match kind {
        ModelKind::ToySech2 => {
            let v = (0..n).map(|i| 1.0 / grid.node(i).cosh().powi(2) - 1.0).collect();
            (v, vec![1.0; n + 1], 0.0)
        }
        _ => {
            let b = radial_barrier(kind, params)?;
            let v = (0..n).map(|i| b.potential_u(b.areal_offset(grid.node(i)))).collect();
            let (rp, _) = b.horizons();
            let m = (0..=n).map(|j| b.mass_weight_x(rp + b.areal_offset(grid.midpoint(j)))).collect();
            (v, m, b.tortoise(b.barrier_top_r()?))
        }
    };
    let problem = CapProblem { kind, h, grid, order: params.order, potential, absorber, mass_weight, barrier_top };
    problem.validate()?;
    Ok(problem)
}

/// `build_model` on the default domain at the minimum admissible resolution.
pub fn build_default(kind: ModelKind, params: &ModelParams, h: f64) -> Result<CapProblem, CapError> {
    check_params(h, params)?;
    build_model(kind, params, h, resolved_grid(kind, params, h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_names_round_trip() {
        for k in [ModelKind::ToySech2, ModelKind::SchwRadial, ModelKind::KerrEquatorial] {
            assert_eq!(k.name().parse::<ModelKind>().unwrap(), k);
        }
        assert!(matches!("sech".parse::<ModelKind>(), Err(CapError::InvalidProblem(_))));
    }

    #[test]
    fn absorber_layout() {
        let s = AbsorberShape::default();
        let w = |x| absorber_profile(&s, 0.0, 10.0, x);
        assert_eq!(w(0.5), 1.0);
        assert_eq!(w(1.0), 1.0);
        assert_eq!(w(9.5), 1.0);
        assert!(w(3.0) < 1e-30);
        assert_eq!(w(5.0), 0.0);
        assert_eq!(w(7.0), 0.0);
        assert!((w(2.0) - 0.5).abs() < 1e-15);
        assert!((w(8.0) - 0.5).abs() < 1e-15);
        // flat to second order at both ramp ends
        for x in [1.0, 3.0, 7.0, 9.0] {
            let e = 1e-3;
            assert!((w(x + e) - w(x - e)).abs() < 1e-6, "x={x}");
        }
    }

    #[test]
    fn tortoise_inverse() {
        for (m, a) in [(1.0, 0.0), (1.0, 0.3), (2.0, 0.9)] {
            let b = RadialBarrier::kerr(m, a, 5.0);
            let k = KerrParams::new(m, a).unwrap();
            let rp = k.horizon_radius();
            for u in [1e-9, 1e-4, 0.1, 1.0, 5.0, 40.0] {
                let x = b.tortoise(rp + u);
                let back = b.areal_offset(x);
                assert!((back - u).abs() <= 1e-10 * u.max(1e-3), "m={m} a={a} u={u} back={back}");
            }
        }
    }

    #[test]
    fn schwarzschild_barrier_top() {
        let b = RadialBarrier::schwarzschild(1.0, 27.0);
        let r = b.barrier_top_r().unwrap();
        assert!((r - 3.0).abs() < 1e-12);
        let (v, v1, _) = b.potential_r(3.0);
        assert!(v.abs() < 1e-14 && v1.abs() < 1e-14);
        assert!((b.mass_weight_r(3.0) - 1.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn under_resolved_grid_is_rejected() {
        let p = ModelParams::default();
        let grid = Grid { x_min: -6.0, x_max: 6.0, n_points: 1000 };
        match build_model(ModelKind::ToySech2, &p, 0.1, grid) {
            Err(CapError::UnderResolved { n_points, required }) => {
                assert_eq!(n_points, 1000);
                assert_eq!(required, 1200);
            }
            other => panic!("expected UnderResolved, got {other:?}"),
        }
        let grid = Grid { n_points: 1200, ..grid };
        assert!(build_model(ModelKind::ToySech2, &p, 0.1, grid).is_ok());
    }

    #[test]
    fn invalid_parameters() {
        let p = ModelParams::default();
        assert!(build_default(ModelKind::ToySech2, &p, 0.5).is_err());
        assert!(build_default(ModelKind::ToySech2, &ModelParams { order: 3, ..p }, 0.1).is_err());
        assert!(build_default(ModelKind::SchwRadial, &ModelParams { k_ang: Some(-1.0), ..p }, 0.1).is_err());
        let thin = AbsorberShape { plateau: 0.05, ramp: 0.2 };
        assert!(build_default(ModelKind::ToySech2, &ModelParams { absorber: thin, ..p }, 0.1).is_err());
        assert!(saddle_exponent(ModelKind::ToySech2, &p).unwrap().mu_eff == 2.0);
    }

    #[test]
    fn validate_catches_edits() {
        let mut prob = build_default(ModelKind::ToySech2, &ModelParams::default(), 0.1).unwrap();
        prob.absorber[0] = 0.5;
        assert!(prob.validate().is_err());
        let mut prob = build_default(ModelKind::ToySech2, &ModelParams::default(), 0.1).unwrap();
        prob.barrier_top = -5.9;
        assert!(prob.validate().is_err());
    }
}
