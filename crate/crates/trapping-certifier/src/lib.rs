//! Trapped set of Kerr: the photon-shell radius `r(β)`, its linearization,
//! numerical certification of normal hyperbolicity, and re-certification
//! under perturbations of the symbol.

mod certify;
mod critical;
mod perturb;
mod radial;
mod saddle;

pub use certify::{certify, certify_with, sample_betas, CertifyOptions, OrbitReport, RatioCheck, TrapCertificate};
pub use critical::{beta_critical_points, beta_interval, critical_points_for, CriticalPoint};
pub use perturb::{perturb_and_recertify, perturb_and_recertify_with, BumpPattern, PerturbationReport, PerturbedRadial};
pub use radial::{KerrRadial, PinnedModel, RadialJet, RadialSymbol, ReducedRadial, SeparableModel};
pub use saddle::{
    kerr_radial, linearization, locate_saddle, potential_v, radial_saddle, saddle_chart, trapped_radius,
    TrappedOrbitChart,
};

use hamiltonian_dynamics::FlowError;
use kerr_geometry::GeometryError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrapError {
    #[error(transparent)]
    Domain(#[from] GeometryError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("no sign change of v' found (beta={beta})")]
    NoBracket { beta: f64 },
    #[error("degenerate maximum at beta={beta}: v''={curvature}")]
    Degenerate { beta: f64, curvature: f64 },
    #[error("not hyperbolic at beta={beta}: B'={b_prime}")]
    NotHyperbolic { beta: f64, b_prime: f64 },
    #[error("degenerate critical point at beta={beta}: det={det}")]
    DegenerateCritical { beta: f64, det: f64 },
    #[error("saddle lost by Newton iteration at beta={beta}")]
    NewtonDiverged { beta: f64 },
    #[error("horizon must be positive, got {0}")]
    InvalidHorizon(f64),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}
