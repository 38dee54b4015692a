//! Macroscopic solver: explicit heat step, particle-driven source term and the
//! blended field update, plus the finite-difference velocity read by particles.
//!
//! Boundaries are Dirichlet ghost cells one cell outside the domain; their
//! values are supplied per step as [`Ghosts`].

use serde::{Deserialize, Serialize};

use crate::analytic::HeatKernel;
use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::particles::VelocityField;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    values: Vec<f64>,
    time_index: usize,
}

impl DensityField {
    pub fn new(values: Vec<f64>) -> Self {
        Self {
            values,
            time_index: 0,
        }
    }

    pub fn with_time_index(mut self, n: usize) -> Self {
        self.time_index = n;
        self
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }

    /// `sum_j phi_j dx`, accumulated in ascending cell order.
    pub fn mass(&self, dx: f64) -> f64 {
        self.values.iter().sum::<f64>() * dx
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Rate of density change caused by particles crossing cell boundaries
/// during one step.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceTerm {
    values: Vec<f64>,
    net_count_change: i64,
}

impl SourceTerm {
    pub fn zeros(n_cells: usize) -> Self {
        Self {
            values: vec![0.0; n_cells],
            net_count_change: 0,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Change in the number of in-domain particles over the step.
    pub fn net_count_change(&self) -> i64 {
        self.net_count_change
    }
}

/// Values in the ghost cells centred at `-x_bound - dx/2` and `x_bound + dx/2`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Ghosts {
    pub left: f64,
    pub right: f64,
}

impl Ghosts {
    pub const ZERO: Ghosts = Ghosts {
        left: 0.0,
        right: 0.0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundaryCondition {
    /// Ghost cells follow the heat kernel, the far field of the problem on the whole line.
    #[default]
    Kernel,
    /// Homogeneous Dirichlet: ghost cells hold 0.
    Zero,
}

impl std::str::FromStr for BoundaryCondition {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kernel" => Ok(BoundaryCondition::Kernel),
            "zero" => Ok(BoundaryCondition::Zero),
            _ => Err(Error::Config(format!("unknown boundary `{s}`"))),
        }
    }
}

impl BoundaryCondition {
    pub fn ghosts(self, kernel: &HeatKernel, grid: &GridSpec, t: f64) -> Ghosts {
        match self {
            BoundaryCondition::Zero => Ghosts::ZERO,
            BoundaryCondition::Kernel => {
                let x = grid.x_bound() + 0.5 * grid.dx();
                let v = kernel.density_unchecked(t, x);
                Ghosts { left: v, right: v }
            }
        }
    }
}

#[inline]
fn second_difference(phi: &[f64], j: usize, ghosts: Ghosts) -> f64 {
    let left = if j == 0 { ghosts.left } else { phi[j - 1] };
    let right = phi.get(j + 1).copied().unwrap_or(ghosts.right);
    right - 2.0 * phi[j] + left
}

fn check_len(field: &DensityField, grid: &GridSpec) -> Result<()> {
    if field.len() != grid.n_cells() {
        return Err(Error::LengthMismatch {
            expected: grid.n_cells(),
            actual: field.len(),
        });
    }
    Ok(())
}

/// One forward-Euler, centred-difference step of `u_t = D u_xx`.
/// Stability (`D dt / dx^2 <= 1/2`) is the caller's responsibility.
pub fn heat_step(
    field: &DensityField,
    grid: &GridSpec,
    diffusion: f64,
    ghosts: Ghosts,
) -> Result<DensityField> {
    check_len(field, grid)?;
    let dt = grid.dt();
    let coef = diffusion / (grid.dx() * grid.dx());
    let phi = field.values();
    let values = (0..phi.len())
        .map(|j| phi[j] + dt * (coef * second_difference(phi, j, ghosts)))
        .collect();
    Ok(DensityField {
        values,
        time_index: field.time_index + 1,
    })
}

fn source_from_delta(
    delta: Vec<i64>,
    net_count_change: i64,
    grid: &GridSpec,
    n_particles: usize,
) -> SourceTerm {
    let scale = 1.0 / (n_particles as f64 * grid.dx() * grid.dt());
    SourceTerm {
        values: delta.into_iter().map(|d| d as f64 * scale).collect(),
        net_count_change,
    }
}

/// Source term from the indicator difference of the two position sets:
/// `S_j = (#{next in E_j} - #{prev in E_j}) / (N_p dx dt)`.
/// Multi-cell jumps and domain exits are covered by the same formula.
pub fn compute_source(
    prev: &[f64],
    next: &[f64],
    grid: &GridSpec,
    n_particles: usize,
) -> Result<SourceTerm> {
    if prev.len() != next.len() {
        return Err(Error::LengthMismatch {
            expected: prev.len(),
            actual: next.len(),
        });
    }
    if n_particles == 0 || n_particles != prev.len() {
        return Err(Error::LengthMismatch {
            expected: n_particles,
            actual: prev.len(),
        });
    }
    let mut delta = vec![0i64; grid.n_cells()];
    let mut net = 0i64;
    for (&a, &b) in prev.iter().zip(next) {
        let from = grid.cell_index(a);
        let to = grid.cell_index(b);
        if from == to {
            continue;
        }
        if let Some(j) = from {
            delta[j] -= 1;
            net -= 1;
        }
        if let Some(j) = to {
            delta[j] += 1;
            net += 1;
        }
    }
    Ok(source_from_delta(delta, net, grid, n_particles))
}

/// Remembers the cell of every particle so that consecutive source terms
/// need one cell lookup per particle. Produces the same values as
/// [`compute_source`].
#[derive(Debug, Clone)]
pub struct CellTracker {
    cells: Vec<Option<u32>>,
    in_domain: usize,
}

impl CellTracker {
    pub fn new(positions: &[f64], grid: &GridSpec) -> Self {
        let cells: Vec<Option<u32>> = positions
            .iter()
            .map(|&y| grid.cell_index(y).map(|j| j as u32))
            .collect();
        let in_domain = cells.iter().filter(|c| c.is_some()).count();
        Self { cells, in_domain }
    }

    pub fn in_domain(&self) -> usize {
        self.in_domain
    }

    /// Source term for the move from the tracked positions to `next`, which
    /// then become the tracked positions.
    pub fn advance(&mut self, next: &[f64], grid: &GridSpec) -> Result<SourceTerm> {
        let n_particles = self.cells.len();
        if next.len() != n_particles {
            return Err(Error::LengthMismatch {
                expected: n_particles,
                actual: next.len(),
            });
        }
        if n_particles == 0 {
            return Err(Error::LengthMismatch {
                expected: 1,
                actual: 0,
            });
        }
        let mut delta = vec![0i64; grid.n_cells()];
        let mut net = 0i64;
        for (cell, &y) in self.cells.iter_mut().zip(next) {
            let to = grid.cell_index(y).map(|j| j as u32);
            if to == *cell {
                continue;
            }
            if let Some(j) = *cell {
                delta[j as usize] -= 1;
                net -= 1;
            }
            if let Some(j) = to {
                delta[j as usize] += 1;
                net += 1;
            }
            *cell = to;
        }
        self.in_domain = (self.in_domain as i64 + net) as usize;
        Ok(source_from_delta(delta, net, grid, n_particles))
    }
}

/// `phi + dt (theta S + (1 - theta) D/dx^2 delta^2 phi)`. At `theta = 0`
/// this is exactly [`heat_step`].
pub fn blended_field_step(
    field: &DensityField,
    source: &SourceTerm,
    grid: &GridSpec,
    diffusion: f64,
    theta: f64,
    ghosts: Ghosts,
) -> Result<DensityField> {
    if theta == 0.0 {
        return heat_step(field, grid, diffusion, ghosts);
    }
    check_len(field, grid)?;
    if source.values.len() != grid.n_cells() {
        return Err(Error::LengthMismatch {
            expected: grid.n_cells(),
            actual: source.values.len(),
        });
    }
    let dt = grid.dt();
    let coef = diffusion / (grid.dx() * grid.dx());
    let phi = field.values();
    let values = (0..phi.len())
        .map(|j| {
            phi[j]
                + dt * (theta * source.values[j]
                    + (1.0 - theta) * coef * second_difference(phi, j, ghosts))
        })
        .collect();
    Ok(DensityField {
        values,
        time_index: field.time_index + 1,
    })
}

/// Centred-difference estimate of `-D phi_x / phi` at `x`.
///
/// The stencil cell is the one containing `x`, moved inward by one at either
/// boundary. Returns 0 when `x` is outside the domain or the density in the
/// stencil cell is below `floor`.
pub fn fd_velocity(
    field: &DensityField,
    grid: &GridSpec,
    diffusion: f64,
    x: f64,
    floor: f64,
) -> f64 {
    let Some(j) = grid.cell_index(x) else {
        return 0.0;
    };
    let phi = field.values();
    let j = j.clamp(1, phi.len() - 2);
    let center = phi[j];
    if !(center >= floor) {
        return 0.0;
    }
    -diffusion / center * (phi[j + 1] - phi[j - 1]) / (2.0 * grid.dx())
}

/// [`fd_velocity`] bound to one field, usable as a particle velocity oracle.
#[derive(Debug, Clone, Copy)]
pub struct FdVelocity<'a> {
    pub field: &'a DensityField,
    pub grid: &'a GridSpec,
    pub diffusion: f64,
    pub floor: f64,
}

impl VelocityField for FdVelocity<'_> {
    #[inline]
    fn velocity_at(&self, _t: f64, x: f64) -> f64 {
        fd_velocity(self.field, self.grid, self.diffusion, x, self.floor)
    }
}
