//! Closed-form Kerr quantities in Boyer–Lindquist coordinates.
//!
//! Everything here is a pure function of a [`KerrParams`] record and, where
//! relevant, a [`PhaseState`] `(r, θ, φ, ξ, α, β)`.

mod params;
mod potential;
mod state;
mod symbol;

pub use params::KerrParams;
pub use potential::{RadialPotential, RadialTerms};
pub use state::{Chart, ConservedTriple, PhaseState};
pub use symbol::{
    carter, conserved, ergosphere_indicator, hamilton_field, horizon_radius, q_positivity_margin,
    q_lower_bound, symbol_p, symbol_p_gradient, symbol_p_hessian, symbol_q, QRegion,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("invalid Kerr parameters: mass={mass}, spin={spin} (need mass > 0, 0 <= spin < mass)")]
    InvalidParams { mass: f64, spin: f64 },
    #[error("r={r} is not outside the horizon r+={r_plus}")]
    InsideHorizon { r: f64, r_plus: f64 },
    #[error("theta={theta} is outside the chart [{min}, pi-{min}]")]
    PolarChart { theta: f64, min: f64 },
    #[error("empty or inverted sampling region: {0}")]
    BadRegion(String),
}
