//! Complex-absorbing-potential operators `P − iW` for reduced barrier models:
//! discretization, windowed spectra, gaps, resolvent norms and decay.

pub mod band;
pub mod discretize;
pub mod eigen;
pub mod gap;
pub mod model;
pub mod resolvent;
pub mod semigroup;

use kerr_geometry::GeometryError;
use num_complex::Complex64 as C64;
use thiserror::Error;
use trapping_certifier::TrapError;

pub use band::{BandLu, BandMatrix};
pub use discretize::{discretize, write_coordinate};
pub use eigen::{eigenvalues, refine_eigenpair, slowest_mode, EigenMethod, EigenOptions, Eigenpair};
pub use gap::{gap_sweep, spectral_gap, write_eigenvalues_csv, write_sweep_csv, GapOptions, GapSweep, SpectrumReport, SweepRow};
pub use model::{
    absorber_profile, build_default, build_model, default_domain, resolved_grid, saddle_exponent, AbsorberShape,
    CapProblem, Grid, ModelKind, ModelParams, RadialBarrier, SaddleExponent,
};
pub use resolvent::{resolvent_norm, resolvent_norm_dense};
pub use semigroup::{gaussian_at_barrier, semigroup_decay, DecayFit, DecayOptions};

#[derive(Debug, Error)]
pub enum CapError {
    #[error("grid under-resolved: {n_points} points, need at least {required}")]
    UnderResolved { n_points: usize, required: usize },
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("eigensolver did not converge near shift {shift} (residual {residual:e})")]
    ConvergenceFailure { shift: C64, residual: f64 },
    #[error("A - z is singular at z = {z}")]
    SingularMatrix { z: C64 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Trap(#[from] TrapError),
}
