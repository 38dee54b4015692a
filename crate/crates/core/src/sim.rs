//! Time loop for every run mode.

use log::warn;

use crate::analytic::HeatKernel;
use crate::error::{Error, Result};
use crate::field::{
    blended_field_step, heat_step, CellTracker, DensityField, FdVelocity, SourceTerm,
};
use crate::grid::{check_cfl, CflReport, FieldInit, GridSpec, Mode, SimParams};
use crate::particles::{estimate_density, DensityEstimate, ParticleEnsemble};

/// Which time levels are stored in a [`RunResult`]. The final level is always stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SnapshotPolicy {
    #[default]
    FinalOnly,
    /// Every level `0..=n_steps`, including particle trajectories.
    All,
    /// Levels that are multiples of the stride.
    Every(usize),
}

impl SnapshotPolicy {
    pub fn records(&self, n: usize, n_steps: usize) -> bool {
        n == n_steps
            || match *self {
                SnapshotPolicy::FinalOnly => false,
                SnapshotPolicy::All => true,
                SnapshotPolicy::Every(k) => k > 0 && n.is_multiple_of(k),
            }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSnapshot {
    pub step: usize,
    pub positions: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    /// Field mass (or histogram mass in particle-only modes) at every level.
    pub total_mass: Vec<f64>,
    /// Particles outside the domain at every level; empty without particles.
    pub out_of_domain: Vec<usize>,
    /// Smallest field value seen over the run; `None` without a field.
    pub min_phi: Option<f64>,
    pub cfl: CflReport,
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub params: SimParams,
    pub grid: GridSpec,
    pub trajectories: Vec<ParticleSnapshot>,
    pub density_snapshots: Vec<DensityField>,
    pub psi_final: Option<DensityEstimate>,
    pub final_positions: Vec<f64>,
    pub final_time_index: usize,
    pub final_time: f64,
    pub diagnostics: Diagnostics,
}

impl RunResult {
    /// The field evolved by the run, if any.
    pub fn final_field(&self) -> Option<&DensityField> {
        if self.params.mode.has_field() {
            self.density_snapshots.last()
        } else {
            None
        }
    }

    /// The quantity compared against the exact solution: the evolved field in
    /// field modes, the final histogram otherwise.
    pub fn final_density(&self) -> Option<&DensityField> {
        self.final_field()
            .or(self.psi_final.as_ref().map(|e| &e.field))
    }
}

fn needs_particles(params: &SimParams) -> bool {
    match params.mode {
        Mode::MacroOnly => false,
        Mode::MicroOnly | Mode::PartialCouplingI | Mode::ConvexDemo => true,
        Mode::PartialCouplingII | Mode::FullCoupling => params.theta > 0.0,
    }
}

/// Checks that would make [`run`] fail before any work is done.
pub fn preflight(params: &SimParams, grid: &GridSpec) -> Result<CflReport> {
    params.validate()?;
    if needs_particles(params) && params.n_particles == 0 {
        return Err(Error::InvalidParam {
            field: "n_particles",
            reason: format!(
                "mode {} with theta = {} needs at least one particle",
                params.mode, params.theta
            ),
        });
    }
    if params.mode.has_field()
        && params.field_init == FieldInit::Histogram
        && params.n_particles == 0
    {
        return Err(Error::InvalidParam {
            field: "field_init",
            reason: "histogram initialisation needs particles".into(),
        });
    }
    let cfl = check_cfl(grid, params.diffusion);
    if !cfl.satisfied {
        match params.mode {
            Mode::MacroOnly | Mode::PartialCouplingII => {
                return Err(Error::Cfl { ratio: cfl.ratio })
            }
            Mode::FullCoupling => warn!(
                "CFL ratio {:.4} exceeds 1/2; the diffusive part may be unstable",
                cfl.ratio
            ),
            _ => {}
        }
    }
    Ok(cfl)
}

pub fn run(params: &SimParams, grid: &GridSpec, policy: SnapshotPolicy) -> Result<RunResult> {
    let cfl = preflight(params, grid)?;
    let kernel = HeatKernel::new(params.diffusion)?;
    let mode = params.mode;
    let n_steps = grid.n_steps();
    let dt = grid.dt();
    let dx = grid.dx();
    let n_p = params.n_particles;

    let mut ensemble = if mode.has_particles() {
        Some(ParticleEnsemble::sample_initial(params, grid))
    } else {
        None
    };
    let mut field = if mode.has_field() {
        Some(match params.field_init {
            FieldInit::Analytic => kernel.initial_field(grid),
            FieldInit::Histogram => {
                let e = ensemble.as_ref().expect("checked in preflight");
                estimate_density(e.positions(), grid, n_p)?.field
            }
        })
    } else {
        None
    };

    let mut trajectories = Vec::new();
    let mut density_snapshots = Vec::new();
    let mut total_mass = Vec::with_capacity(n_steps + 1);
    let mut out_of_domain = Vec::new();
    let mut min_phi = field.as_ref().map(|f| f.min());
    let mut tracker = match (&ensemble, mode) {
        (Some(e), Mode::PartialCouplingII | Mode::FullCoupling) if n_p > 0 => {
            Some(CellTracker::new(e.positions(), grid))
        }
        _ => None,
    };

    let mut record =
        |n: usize, ensemble: &Option<ParticleEnsemble>, field: &Option<DensityField>| {
            let ood = ensemble.as_ref().map(|e| e.out_of_domain(grid));
            if let Some(ood) = ood {
                out_of_domain.push(ood);
            }
            total_mass.push(match field {
                Some(f) => f.mass(dx),
                None if n_p == 0 => 0.0,
                None => (n_p - ood.unwrap_or(0)) as f64 / n_p as f64,
            });
            if !policy.records(n, n_steps) {
                return;
            }
            if let Some(f) = field {
                density_snapshots.push(f.clone());
            }
            if let (Some(e), false) = (ensemble, policy == SnapshotPolicy::FinalOnly) {
                trajectories.push(ParticleSnapshot {
                    step: n,
                    positions: e.positions().to_vec(),
                });
            }
        };

    record(0, &ensemble, &field);
    for n in 0..n_steps {
        let t_n = grid.time(n);
        let ghosts = params.boundary.ghosts(&kernel, grid, t_n);
        match mode {
            Mode::MicroOnly => ensemble.as_mut().unwrap().euler_step(params, dt),
            Mode::PartialCouplingI => ensemble
                .as_mut()
                .unwrap()
                .regularized_step(params, t_n, dt, &kernel),
            Mode::ConvexDemo => ensemble.as_mut().unwrap().convex_demo_step(params, t_n, dt),
            Mode::MacroOnly => {
                let f = field.as_ref().unwrap();
                field = Some(heat_step(f, grid, params.diffusion, ghosts)?);
            }
            Mode::PartialCouplingII | Mode::FullCoupling => {
                let e = ensemble.as_mut().unwrap();
                let f = field.as_ref().unwrap();
                if mode == Mode::PartialCouplingII {
                    e.euler_step(params, dt);
                } else {
                    let oracle = FdVelocity {
                        field: f,
                        grid,
                        diffusion: params.diffusion,
                        floor: params.density_floor,
                    };
                    e.regularized_step(params, t_n, dt, &oracle);
                }
                let source = match &mut tracker {
                    Some(t) => t.advance(e.positions(), grid)?,
                    None => SourceTerm::zeros(grid.n_cells()),
                };
                field = Some(blended_field_step(
                    f,
                    &source,
                    grid,
                    params.diffusion,
                    params.theta,
                    ghosts,
                )?);
            }
        }
        if let (Some(f), Some(m)) = (&field, &mut min_phi) {
            *m = m.min(f.min());
        }
        record(n + 1, &ensemble, &field);
    }

    let (psi_final, final_positions, final_time_index) = match ensemble {
        Some(e) => {
            let psi = if n_p > 0 {
                Some(e.estimate_density(grid, n_p)?)
            } else {
                None
            };
            let idx = e.time_index();
            (psi, e.positions().to_vec(), idx)
        }
        None => (
            None,
            Vec::new(),
            field.as_ref().map_or(n_steps, |f| f.time_index()),
        ),
    };

    Ok(RunResult {
        params: *params,
        grid: *grid,
        trajectories,
        density_snapshots,
        psi_final,
        final_positions,
        final_time_index,
        final_time: grid.time(final_time_index),
        diagnostics: Diagnostics {
            total_mass,
            out_of_domain,
            min_phi,
            cfl,
        },
    })
}
