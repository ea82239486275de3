//! Escape functions near a hyperbolic saddle of a one-degree-of-freedom
//! symbol: defining functions `φ±` of the outgoing/incoming tails `Γ±`, the
//! exterior escape function `G₁`, the log-flattened `G`, and symbol-level
//! checks of the positive-commutator chain.

mod cheb;
mod cutoff;
mod escape;
mod g1;
mod order;
mod pair;

pub use cheb::Chebyshev;
pub use cutoff::Cutoff;
pub use escape::{build_escape, commutator_lower_bound, disc_grid, EscapeFunction, EscapeReport, EscapeSpec};
pub use g1::{build_g1, G1Report, G1};
pub use order::{order_function_check, order_function_sweep, order_table, sample_pairs, OrderTable};
pub use pair::{build_defining_pair, verify_defg_relations, DefGReport, DefiningPair, SaddlePoint};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EscapeError {
    #[error("saddle is not hyperbolic (mu^2={mu2})")]
    NotHyperbolic { mu2: f64 },
    #[error("gradient does not vanish at the saddle (|dp|={residual})")]
    NotCritical { residual: f64 },
    #[error("tail manifold lost at x={x}")]
    ManifoldLost { x: f64 },
    #[error("neighbourhoods not nested: inner={inner}, outer={outer}")]
    InvalidNesting { inner: f64, outer: f64 },
    #[error("grid too coarse: {0}")]
    GridTooCoarse(String),
    #[error("no polynomial order N <= 8 bounds the weight ratios")]
    Unbounded,
    #[error("invalid specification: {0}")]
    InvalidSpec(String),
}
