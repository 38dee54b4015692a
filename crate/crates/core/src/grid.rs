//! Space-time grid, physical parameters and run modes shared by every solver.
//!
//! Cells are indexed from zero: cell `j` is `[x_j - dx/2, x_j + dx/2)` with
//! centre `x_j = -x_bound + (j + 1/2) dx`. Time levels are
//! `t_n = t_init + n dt` for `n = 0..=n_steps`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::BoundaryCondition;

pub const DEFAULT_X_BOUND: f64 = 8.0;
pub const DEFAULT_N_CELLS: usize = 50;
pub const DEFAULT_T_INIT: f64 = 0.5;
pub const DEFAULT_T_FINAL: f64 = 5.0;
pub const DEFAULT_N_STEPS: usize = 500;
pub const DEFAULT_DIFFUSION: f64 = 0.5;
/// Below this value `fd_velocity` treats the density as empty.
pub const DEFAULT_DENSITY_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    x_bound: f64,
    n_cells: usize,
    t_init: f64,
    t_final: f64,
    n_steps: usize,
    dx: f64,
    dt: f64,
}

impl GridSpec {
    pub fn new(
        x_bound: f64,
        n_cells: usize,
        t_init: f64,
        t_final: f64,
        n_steps: usize,
    ) -> Result<Self> {
        if !(x_bound.is_finite() && x_bound > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "x_bound must be positive, got {x_bound}"
            )));
        }
        if n_cells < 3 {
            return Err(Error::InvalidGrid(format!(
                "n_cells must be at least 3, got {n_cells}"
            )));
        }
        if n_steps < 1 {
            return Err(Error::InvalidGrid("n_steps must be at least 1".into()));
        }
        if !(t_init.is_finite() && t_init > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "t_init must be positive (the initial Dirac mass is not representable), got {t_init}"
            )));
        }
        if !(t_final.is_finite() && t_final > t_init) {
            return Err(Error::InvalidGrid(format!(
                "t_final must exceed t_init, got t_init = {t_init}, t_final = {t_final}"
            )));
        }
        Ok(Self {
            x_bound,
            n_cells,
            t_init,
            t_final,
            n_steps,
            dx: 2.0 * x_bound / n_cells as f64,
            dt: (t_final - t_init) / n_steps as f64,
        })
    }

    pub fn x_bound(&self) -> f64 {
        self.x_bound
    }

    pub fn n_cells(&self) -> usize {
        self.n_cells
    }

    pub fn t_init(&self) -> f64 {
        self.t_init
    }

    pub fn t_final(&self) -> f64 {
        self.t_final
    }

    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    /// Centre of cell `j`.
    pub fn cell_center(&self, j: usize) -> f64 {
        -self.x_bound + (j as f64 + 0.5) * self.dx
    }

    pub fn cell_centers(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_cells).map(|j| self.cell_center(j))
    }

    /// Time of level `n`.
    pub fn time(&self, n: usize) -> f64 {
        if n == self.n_steps {
            self.t_final
        } else {
            self.t_init + n as f64 * self.dt
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= -self.x_bound && x < self.x_bound
    }

    /// Index of the cell containing `x`, or `None` outside `[-x_bound, x_bound)`.
    pub fn cell_index(&self, x: f64) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        // non-negative here, so truncation is floor
        let j = ((x + self.x_bound) / self.dx) as usize;
        // x just below x_bound can round up to n_cells
        Some(j.min(self.n_cells - 1))
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self::new(
            DEFAULT_X_BOUND,
            DEFAULT_N_CELLS,
            DEFAULT_T_INIT,
            DEFAULT_T_FINAL,
            DEFAULT_N_STEPS,
        )
        .expect("default grid is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Weak Euler random walk only.
    MicroOnly,
    /// Explicit finite-difference heat equation only.
    MacroOnly,
    /// Regularized Brownian motion driven by the analytic macroscopic velocity.
    PartialCouplingI,
    /// Convex combination of micro and macro displacements; a known-bad scheme.
    ConvexDemo,
    /// Heat equation corrected by the particle source term.
    PartialCouplingII,
    /// Two-way coupling through the finite-difference velocity and the source term.
    FullCoupling,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::MicroOnly,
        Mode::MacroOnly,
        Mode::PartialCouplingI,
        Mode::ConvexDemo,
        Mode::PartialCouplingII,
        Mode::FullCoupling,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::MicroOnly => "micro-only",
            Mode::MacroOnly => "macro-only",
            Mode::PartialCouplingI => "partial-coupling-i",
            Mode::ConvexDemo => "convex-demo",
            Mode::PartialCouplingII => "partial-coupling-ii",
            Mode::FullCoupling => "full-coupling",
        }
    }

    /// Whether the mode advances a particle ensemble.
    pub fn has_particles(self) -> bool {
        !matches!(self, Mode::MacroOnly)
    }

    /// Whether the mode advances a finite-difference field.
    pub fn has_field(self) -> bool {
        matches!(
            self,
            Mode::MacroOnly | Mode::PartialCouplingII | Mode::FullCoupling
        )
    }
}

impl std::fmt::Display for Mode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Mode::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown mode `{s}`")))
    }
}

/// How the field is initialised in modes that evolve one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldInit {
    /// Point values of the exact solution at `t_init`.
    #[default]
    Analytic,
    /// Histogram of the initial particle ensemble.
    Histogram,
}

impl std::str::FromStr for FieldInit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "analytic" => Ok(FieldInit::Analytic),
            "histogram" => Ok(FieldInit::Histogram),
            _ => Err(Error::Config(format!("unknown field_init `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimParams {
    pub diffusion: f64,
    pub theta: f64,
    pub n_particles: usize,
    pub seed: u64,
    pub mode: Mode,
    /// Draw both the branch uniform and the sign uniform for every particle
    /// and step, whether or not they are used.
    pub common_random_numbers: bool,
    pub field_init: FieldInit,
    pub boundary: BoundaryCondition,
    pub density_floor: f64,
}

impl SimParams {
    pub fn new(mode: Mode, theta: f64, n_particles: usize, seed: u64) -> Self {
        Self {
            diffusion: DEFAULT_DIFFUSION,
            theta,
            n_particles,
            seed,
            mode,
            common_random_numbers: false,
            field_init: FieldInit::Analytic,
            boundary: BoundaryCondition::Kernel,
            density_floor: DEFAULT_DENSITY_FLOOR,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.diffusion.is_finite() && self.diffusion > 0.0) {
            return Err(Error::InvalidParam {
                field: "diffusion",
                reason: format!("must be positive, got {}", self.diffusion),
            });
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidParam {
                field: "theta",
                reason: format!("must lie in [0, 1], got {}", self.theta),
            });
        }
        if !(self.density_floor.is_finite() && self.density_floor >= 0.0) {
            return Err(Error::InvalidParam {
                field: "density_floor",
                reason: format!("must be non-negative, got {}", self.density_floor),
            });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflReport {
    /// `D dt / dx^2`.
    pub ratio: f64,
    pub satisfied: bool,
    /// Magnitude of one weak Euler displacement, `sqrt(2 D dt)`.
    pub particle_step: f64,
    /// Particles move at most one cell per step.
    pub particle_satisfied: bool,
}

pub fn check_cfl(grid: &GridSpec, diffusion: f64) -> CflReport {
    let ratio = diffusion * grid.dt() / (grid.dx() * grid.dx());
    let particle_step = (2.0 * diffusion * grid.dt()).sqrt();
    CflReport {
        ratio,
        satisfied: ratio <= 0.5,
        particle_step,
        particle_satisfied: particle_step <= grid.dx(),
    }
}
