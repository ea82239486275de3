use hamiltonian_dynamics::HamiltonianModel;
use serde::Serialize;

use crate::cutoff::smoothstep;
use crate::pair::{DefiningPair, SaddlePoint};
use crate::EscapeError;

/// Exterior escape function `G₁ = A·F(g)` with `g = (x − x*)(ξ − ξ*)` and
/// `F(g) = g·S((g² − g_in²)/(g_out² − g_in²))`, `S` the quintic smoothstep.
///
/// `F′ ≥ 0`, so `H_pG₁ = A·F′(g)·H_pg` inherits the sign of `H_pg`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct G1 {
    pub saddle: SaddlePoint,
    pub u_radius: f64,
    pub v_radius: f64,
    pub g_in: f64,
    pub g_out: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct G1Report {
    pub samples: usize,
    /// `max |G₁|` over samples in `U`.
    pub max_on_u: f64,
    /// `min H_pG₁` over all samples.
    pub min_hp: f64,
    /// `min H_pG₁` on the energy band `|p − E| ≤ δ` outside `V`, before normalization.
    pub raw_floor: f64,
    pub floor: f64,
    /// `max H_pG₁` on the band `|p − E| ≤ 2δ`.
    pub band_max: f64,
    pub passed: bool,
}

impl G1 {
    fn profile(&self, g: f64) -> (f64, f64) {
        let w = self.g_out * self.g_out - self.g_in * self.g_in;
        let (s, ds) = smoothstep((g * g - self.g_in * self.g_in) / w);
        (self.amplitude * g * s, self.amplitude * (s + 2.0 * g * g * ds / w))
    }

    /// Value and gradient in `(x, ξ)`.
    pub fn eval(&self, x: f64, xi: f64) -> (f64, [f64; 2]) {
        let (dx, dk) = (x - self.saddle.x, xi - self.saddle.xi);
        let (f, f1) = self.profile(dx * dk);
        (f, [f1 * dk, f1 * dx])
    }

    pub fn hp<M: HamiltonianModel>(&self, model: &M, x: f64, xi: f64) -> f64 {
        let (_, d) = self.eval(x, xi);
        let mut g = [0.0; 2];
        model.gradient(&[x, xi], &mut g);
        g[1] * d[0] - g[0] * d[1]
    }
}

/// Builds `G₁` vanishing on the adapted disc `U` and normalized so that
/// `H_pG₁ ≥ 1` on the band `|p − E| ≤ δ` outside `V`; the checks run on a
/// `grid_n × grid_n` grid of the adapted unit disc.
pub fn build_g1<M: HamiltonianModel>(
    pair: &DefiningPair<M>,
    u_radius: f64,
    v_radius: f64,
    delta: f64,
    grid_n: usize,
) -> Result<(G1, G1Report), EscapeError> {
    if !(u_radius > 0.0 && u_radius < v_radius && v_radius < 1.0) {
        return Err(EscapeError::InvalidNesting { inner: u_radius, outer: v_radius });
    }
    if grid_n < 16 {
        return Err(EscapeError::GridTooCoarse(format!("{grid_n} points per side (need 16)")));
    }
    let grid = crate::escape::disc_grid(pair, 1.0, grid_n);
    let e = pair.energy;
    let s = pair.saddle;
    let in_band = |x: f64, xi: f64, w: f64| (pair.model.value(&[x, xi]) - e).abs() <= w;
    let outside_v = |x: f64, xi: f64| pair.radius(x, xi).0 > v_radius;
    let band: Vec<(f64, f64)> = grid.iter().copied().filter(|&(x, xi)| in_band(x, xi, delta) && outside_v(x, xi)).collect();
    if band.is_empty() {
        return Err(EscapeError::GridTooCoarse("no samples on the energy band outside V".into()));
    }
    let g_in = 0.5 * u_radius * u_radius;
    let g_band = band.iter().map(|&(x, xi)| ((x - s.x) * (xi - s.xi)).abs()).fold(f64::INFINITY, f64::min);
    let g_out = 0.9 * g_band;
    if !(g_out > g_in) {
        return Err(EscapeError::InvalidSpec(format!(
            "energy band delta={delta} reaches into U (|g| >= {g_band} outside V vs {g_in} on U)"
        )));
    }
    let mut g1 = G1 { saddle: s, u_radius, v_radius, g_in, g_out, amplitude: 1.0 };
    let raw_floor = band.iter().map(|&(x, xi)| g1.hp(&pair.model, x, xi)).fold(f64::INFINITY, f64::min);
    if !(raw_floor > 0.0) {
        return Err(EscapeError::InvalidSpec(format!("H_p G1 is not positive on the band (min {raw_floor})")));
    }
    g1.amplitude = 1.0 / raw_floor;

    let mut max_on_u: f64 = 0.0;
    let mut min_hp = f64::INFINITY;
    let mut floor = f64::INFINITY;
    let mut band_max = f64::NEG_INFINITY;
    for &(x, xi) in &grid {
        let hp = g1.hp(&pair.model, x, xi);
        min_hp = min_hp.min(hp);
        if pair.radius(x, xi).0 <= u_radius {
            max_on_u = max_on_u.max(g1.eval(x, xi).0.abs());
        }
        if in_band(x, xi, delta) && outside_v(x, xi) {
            floor = floor.min(hp);
        }
        if in_band(x, xi, 2.0 * delta) {
            band_max = band_max.max(hp);
        }
    }
    let passed = max_on_u < 1e-10 && min_hp >= -1e-6 && floor >= 1.0 - 1e-9;
    Ok((g1, G1Report { samples: grid.len(), max_on_u, min_hp, raw_floor, floor, band_max, passed }))
}
