use hamiltonian_dynamics::HamiltonianModel;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::escape::EscapeFunction;
use crate::pair::DefiningPair;
use crate::EscapeError;

pub const MAX_ORDER: usize = 8;

/// `log C_N = max over pairs of G(ρ) − G(ρ′) − N log⟨|ρ − ρ′|/√(h/h̃)⟩`
/// for `N = 0..=8`, at one `h`. Distances are measured in saddle-adapted
/// coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderTable {
    pub h: f64,
    pub log_c: Vec<f64>,
}

/// Pairs of points drawn uniformly from the adapted disc of the given radius.
pub fn sample_pairs<M: HamiltonianModel>(
    pair: &DefiningPair<M>,
    radius: f64,
    n: usize,
    seed: u64,
) -> Vec<((f64, f64), (f64, f64))> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let point = |rng: &mut ChaCha8Rng| loop {
        let y: f64 = rng.random_range(-radius..radius);
        let eta: f64 = rng.random_range(-radius..radius);
        if y.hypot(eta) <= radius {
            return pair.from_adapted(y, eta);
        }
    };
    (0..n).map(|_| (point(&mut rng), point(&mut rng))).collect()
}

pub fn order_function_check<M: HamiltonianModel>(
    ef: &EscapeFunction<'_, M>,
    samples: &[((f64, f64), (f64, f64))],
) -> OrderTable {
    order_table(|x, xi| ef.value(x, xi), ef.pair, ef.spec.h, ef.spec.eps2(), samples)
}

/// [`order_function_check`] for an arbitrary log-weight `weight`.
pub fn order_table<M: HamiltonianModel, W: Fn(f64, f64) -> f64 + Sync>(
    weight: W,
    pair: &DefiningPair<M>,
    h: f64,
    eps2: f64,
    samples: &[((f64, f64), (f64, f64))],
) -> OrderTable {
    let eps = eps2.sqrt();
    let init = || vec![f64::NEG_INFINITY; MAX_ORDER + 1];
    let log_c = samples
        .par_iter()
        .fold(init, |mut acc, &(a, b)| {
            let (ya, ea) = pair.adapted(a.0, a.1);
            let (yb, eb) = pair.adapted(b.0, b.1);
            let d = (ya - yb).hypot(ea - eb) / eps;
            let bracket = 0.5 * (1.0 + d * d).ln();
            let ratio = weight(a.0, a.1) - weight(b.0, b.1);
            for (n, c) in acc.iter_mut().enumerate() {
                *c = c.max(ratio - n as f64 * bracket);
            }
            acc
        })
        .reduce(init, |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect());
    // ρ = ρ′ is always admissible, so C ≥ 1
    let log_c = log_c.into_iter().map(|c| c.max(0.0)).collect();
    OrderTable { h, log_c }
}

/// Smallest `N` whose constant varies by less than a factor 2 across the
/// tables (one per `h`), with `C` the largest constant at that `N`.
pub fn order_function_sweep(tables: &[OrderTable]) -> Result<(f64, u32), EscapeError> {
    if tables.is_empty() {
        return Err(EscapeError::InvalidSpec("empty h-sweep".into()));
    }
    for n in 0..=MAX_ORDER {
        let hi = tables.iter().map(|t| t.log_c[n]).fold(f64::NEG_INFINITY, f64::max);
        let lo = tables.iter().map(|t| t.log_c[n]).fold(f64::INFINITY, f64::min);
        if hi.is_finite() && hi - lo < std::f64::consts::LN_2 {
            return Ok((hi.exp(), n as u32));
        }
    }
    Err(EscapeError::Unbounded)
}

