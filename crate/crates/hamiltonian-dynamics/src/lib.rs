//! Hamiltonian flows `φᵗ` and their linearizations `dφᵗ`.
//!
//! Phase points are flat slices `[q₁..qₙ, p₁..pₙ]`; the flow is
//! `q′ = ∂p/∂(momenta)`, `p′ = −∂p/∂(positions)`.

mod fit;
mod flow;
mod integrator;
pub mod models;
mod orbit;

pub use fit::{fit_line, tail_rate, RateFit};
pub use flow::{
    finite_time_exponents, integrate_flow, integrate_sampled, integrate_with, symplectic_defect,
    tangent_flow, FlowOptions, FlowResult,
};
pub use models::HamiltonianModel;
pub use orbit::{kerr_orbit_rows, write_orbit_csv, OrbitRow};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("orbit left the valid chart at t={time}")]
    ChartExit { time: f64 },
    #[error("step size underflow at t={time} (h={step})")]
    StepFailure { time: f64, step: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
