use hamiltonian_dynamics::HamiltonianModel;
use serde::Serialize;
use trapping_certifier::TrappedOrbitChart;

use crate::cheb::Chebyshev;
use crate::EscapeError;

const NODES: usize = 96;
/// Half-width of the interpolation window in saddle-adapted units.
const HALF_WIDTH: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddlePoint {
    pub x: f64,
    pub xi: f64,
}

impl From<&TrappedOrbitChart> for SaddlePoint {
    fn from(c: &TrappedOrbitChart) -> Self {
        Self { x: c.trapped_radius, xi: c.trapped_xi }
    }
}

/// Defining functions `φ₊ = ξ − ξ* − g₊(x − x*)` of the outgoing tail and
/// `φ₋` of the incoming tail, written as graphs over `x` and normalized by
/// `∂_ξφ± = 1`, together with the rates `c±` of `H_pφ± = ∓c±²φ±`.
/// Each `g±` is its exact tangent line plus a Chebyshev interpolant of the
/// remainder.
///
/// Adapted coordinates `y = κ(x − x*)`, `η = (ξ − ξ*)/κ` with
/// `κ = (|∂²_xp| / ∂²_ξp)^{1/4}` make the saddle's quadratic part isotropic.
#[derive(Debug, Clone)]
pub struct DefiningPair<M> {
    pub model: M,
    pub saddle: SaddlePoint,
    pub energy: f64,
    /// Expansion rate `μ` of the linearized `H_p` flow.
    pub exponent: f64,
    pub kappa: f64,
    pub slopes: [f64; 2],
    pub graphs: [Chebyshev; 2],
    /// Multipliers of `φ₊, φ₋` (rates transform inversely).
    pub scale: [f64; 2],
    pub c0: f64,
    /// Largest `|φ±|` at tail points not used as interpolation nodes.
    pub manifold_residual: f64,
}

fn grad2<M: HamiltonianModel>(m: &M, x: f64, xi: f64) -> [f64; 2] {
    let mut g = [0.0; 2];
    m.gradient(&[x, xi], &mut g);
    g
}

fn hess2<M: HamiltonianModel>(m: &M, x: f64, xi: f64) -> [f64; 4] {
    let mut h = [0.0; 4];
    m.hessian(&[x, xi], &mut h);
    h
}

/// Root of `p(x, ·) = energy` by Newton from `guess`.
fn tail_point<M: HamiltonianModel>(m: &M, energy: f64, x: f64, guess: f64) -> Option<f64> {
    let mut xi = guess;
    for _ in 0..100 {
        let f = m.value(&[x, xi]) - energy;
        let d = grad2(m, x, xi)[1];
        if d == 0.0 || !f.is_finite() {
            return None;
        }
        let step = f / d;
        xi -= step;
        if step.abs() <= 1e-15 * (1.0 + xi.abs()) {
            return Some(xi);
        }
    }
    None
}

pub fn build_defining_pair<M, S>(model: M, saddle: S) -> Result<DefiningPair<M>, EscapeError>
where
    M: HamiltonianModel,
    S: Into<SaddlePoint>,
{
    if model.dimension() != 2 {
        return Err(EscapeError::InvalidSpec(format!("model dimension {} (need 2)", model.dimension())));
    }
    let s = saddle.into();
    let g = grad2(&model, s.x, s.xi);
    let residual = g[0].hypot(g[1]);
    if residual > 1e-8 {
        return Err(EscapeError::NotCritical { residual });
    }
    let h = hess2(&model, s.x, s.xi);
    let (hxx, hxk, hkk) = (h[0], h[1], h[3]);
    let mu2 = hxk * hxk - hxx * hkk;
    if !(mu2 > 0.0) || hkk == 0.0 {
        return Err(EscapeError::NotHyperbolic { mu2 });
    }
    let mu = mu2.sqrt();
    let kappa = (hxx.abs() / hkk.abs()).powf(0.25);
    let energy = model.value(&[s.x, s.xi]);
    let slopes = [(mu - hxk) / hkk, (-mu - hxk) / hkk];
    let half = HALF_WIDTH / kappa;
    let nodes = Chebyshev::nodes(-half, half, NODES);

    let branch = |dx: f64| -> Result<[f64; 2], EscapeError> {
        let x = s.x + dx;
        let mut out = [0.0; 2];
        for (o, sl) in out.iter_mut().zip(slopes) {
            let root = tail_point(&model, energy, x, s.xi + sl * dx).ok_or(EscapeError::ManifoldLost { x })?;
            *o = root - s.xi;
        }
        if !((out[0] - out[1]) * (slopes[0] - slopes[1]) * dx > 0.0) {
            return Err(EscapeError::ManifoldLost { x });
        }
        Ok(out)
    };
    let mut vals = [Vec::with_capacity(NODES), Vec::with_capacity(NODES)];
    for &dx in &nodes {
        if !model.in_chart(&[s.x + dx, s.xi]) {
            return Err(EscapeError::ManifoldLost { x: s.x + dx });
        }
        let b = branch(dx)?;
        vals[0].push(b[0] - slopes[0] * dx);
        vals[1].push(b[1] - slopes[1] * dx);
    }
    let graphs = [Chebyshev::from_values(-half, half, &vals[0]), Chebyshev::from_values(-half, half, &vals[1])];

    // residual at points between the nodes
    let mut manifold_residual: f64 = 0.0;
    for k in 0..64 {
        let dx = -0.97 * half + 1.94 * half * (k as f64 + 0.5) / 64.0;
        let b = branch(dx)?;
        for i in 0..2 {
            manifold_residual = manifold_residual.max((b[i] - slopes[i] * dx - graphs[i].value(dx)).abs());
        }
    }

    let mut pair = DefiningPair {
        model,
        saddle: s,
        energy,
        exponent: mu,
        kappa,
        slopes,
        graphs,
        scale: [1.0, 1.0],
        c0: 0.0,
        manifold_residual,
    };
    if pair.bracket(s.x, s.xi) < 0.0 {
        pair.scale[1] = -1.0;
    }
    pair.c0 = pair.bracket(s.x, s.xi);
    Ok(pair)
}

impl<M: HamiltonianModel> DefiningPair<M> {
    /// Same pair with `φ± ↦ kφ±` and `c± ↦ c±/k`.
    pub fn rescaled(&self, k: f64) -> Self
    where
        M: Clone,
    {
        let mut p = self.clone();
        p.scale = [k * self.scale[0], k * self.scale[1]];
        p.c0 = p.bracket(p.saddle.x, p.saddle.xi);
        p
    }

    pub fn adapted(&self, x: f64, xi: f64) -> (f64, f64) {
        (self.kappa * (x - self.saddle.x), (xi - self.saddle.xi) / self.kappa)
    }

    pub fn from_adapted(&self, y: f64, eta: f64) -> (f64, f64) {
        (self.saddle.x + y / self.kappa, self.saddle.xi + eta * self.kappa)
    }

    /// Adapted radius and its gradient in `(x, ξ)`.
    pub fn radius(&self, x: f64, xi: f64) -> (f64, [f64; 2]) {
        let (y, eta) = self.adapted(x, xi);
        let r = y.hypot(eta);
        if r == 0.0 {
            return (0.0, [0.0, 0.0]);
        }
        (r, [self.kappa * y / r, eta / (self.kappa * r)])
    }

    /// `φ₊` (`i = 0`) or `φ₋` (`i = 1`) with gradient.
    pub fn phi(&self, i: usize, x: f64, xi: f64) -> (f64, [f64; 2]) {
        let dx = x - self.saddle.x;
        let k = self.scale[i];
        let (g, g1) = self.graph(i, dx);
        (k * (xi - self.saddle.xi - g), [-k * g1, k])
    }

    /// `g±(dx)` and its derivative.
    pub fn graph(&self, i: usize, dx: f64) -> (f64, f64) {
        let c = &self.graphs[i];
        (self.slopes[i] * dx + c.value(dx), self.slopes[i] + c.derivative(dx))
    }

    pub fn phi_plus(&self, x: f64, xi: f64) -> (f64, [f64; 2]) {
        self.phi(0, x, xi)
    }

    pub fn phi_minus(&self, x: f64, xi: f64) -> (f64, [f64; 2]) {
        self.phi(1, x, xi)
    }

    /// `H_p f = ∂_ξp ∂_x f − ∂_xp ∂_ξ f` for a function with gradient `df`.
    pub fn hp(&self, x: f64, xi: f64, df: [f64; 2]) -> f64 {
        let g = grad2(&self.model, x, xi);
        g[1] * df[0] - g[0] * df[1]
    }

    /// `c±²` from `H_pφ± = ∓c±²φ±`; the quotient is a divided difference in
    /// `ξ` across the tail, filled by its `ξ`-derivative on the tail.
    pub fn c_squared(&self, i: usize, x: f64, xi: f64) -> f64 {
        let dx = x - self.saddle.x;
        let (gv, gd) = self.graph(i, dx);
        let on = self.saddle.xi + gv;
        let num = |k: f64| {
            let p = grad2(&self.model, x, k);
            p[1] * gd + p[0]
        };
        let d = xi - on;
        let raw = if d.abs() > 1e-6 * self.kappa {
            (num(xi) - num(on)) / d
        } else {
            let h = hess2(&self.model, x, on);
            h[3] * gd + h[2]
        };
        let sign = if i == 0 { 1.0 } else { -1.0 };
        sign * raw / (self.scale[i] * self.scale[i])
    }

    pub fn c(&self, i: usize, x: f64, xi: f64) -> f64 {
        self.c_squared(i, x, xi).max(0.0).sqrt()
    }

    /// `c±` with a central-difference gradient.
    pub fn c_with_gradient(&self, i: usize, x: f64, xi: f64) -> (f64, [f64; 2]) {
        let hx = 1e-6 / self.kappa;
        let hk = 1e-6 * self.kappa;
        let dx = (self.c(i, x + hx, xi) - self.c(i, x - hx, xi)) / (2.0 * hx);
        let dk = (self.c(i, x, xi + hk) - self.c(i, x, xi - hk)) / (2.0 * hk);
        (self.c(i, x, xi), [dx, dk])
    }

    /// `{φ₊, φ₋} = ∂_ξφ₊ ∂_xφ₋ − ∂_xφ₊ ∂_ξφ₋`.
    pub fn bracket(&self, x: f64, xi: f64) -> f64 {
        let (_, a) = self.phi(0, x, xi);
        let (_, b) = self.phi(1, x, xi);
        a[1] * b[0] - a[0] * b[1]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DefGReport {
    pub samples: usize,
    pub min_bracket: f64,
    /// Largest positive value of `H_pφ₊/φ₊` or `−H_pφ₋/φ₋`.
    pub max_sign_violation: f64,
    pub violations: usize,
    pub passed: bool,
}

/// Checks the sign of `H_pφ±/φ±` (where `|φ±| > tol`) and positivity of
/// the bracket on the given samples.
pub fn verify_defg_relations<M: HamiltonianModel>(
    pair: &DefiningPair<M>,
    samples: &[(f64, f64)],
    tol: f64,
) -> DefGReport {
    let mut min_bracket = f64::INFINITY;
    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for &(x, xi) in samples {
        min_bracket = min_bracket.min(pair.bracket(x, xi));
        for (i, sign) in [(0, 1.0), (1, -1.0)] {
            let (v, d) = pair.phi(i, x, xi);
            if v.abs() > tol {
                let q = sign * pair.hp(x, xi, d) / v;
                if q > 0.0 {
                    violations += 1;
                    worst = worst.max(q);
                }
            }
        }
    }
    DefGReport {
        samples: samples.len(),
        min_bracket,
        max_sign_violation: worst,
        violations,
        passed: violations == 0 && min_bracket > 0.0,
    }
}
