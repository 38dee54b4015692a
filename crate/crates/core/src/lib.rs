//! Blending a Brownian particle solver with an explicit heat-equation solver
//! in one space dimension.
//!
//! A weight `theta` in `[0, 1]` selects between purely microscopic dynamics
//! (`theta = 1`, particles performing a weak Euler random walk) and purely
//! macroscopic dynamics (`theta = 0`, a finite-difference heat equation).
//! Intermediate values give the regularized random walk, the
//! particle-corrected heat equation, and their two-way coupling; see [`Mode`].

pub mod analytic;
pub mod config;
pub mod error;
pub mod field;
pub mod figures;
pub mod grid;
pub mod metrics;
pub mod output;
pub mod particles;
pub mod rng;
pub mod sim;

pub use analytic::{exact_macro_trajectory, HeatKernel};
pub use config::RunConfig;
pub use error::{Error, Result};
pub use field::{
    blended_field_step, compute_source, fd_velocity, heat_step, BoundaryCondition, CellTracker,
    DensityField, FdVelocity, Ghosts, SourceTerm,
};
pub use grid::{check_cfl, CflReport, FieldInit, GridSpec, Mode, SimParams};
pub use metrics::{
    averaged_error, iso_error_search, l1_error, ErrorReport, IsoErrorPoint, IsoErrorSearch,
};
pub use particles::{estimate_density, DensityEstimate, ParticleEnsemble, VelocityField};
pub use sim::{run, RunResult, SnapshotPolicy};
