//! Closed-form heat kernel and the quantities derived from it.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::field::DensityField;
use crate::grid::GridSpec;

/// Fundamental solution of `u_t = D u_xx` started from a unit Dirac mass at 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatKernel {
    diffusion: f64,
}

fn require_positive_time(t: f64) -> Result<()> {
    if t.is_finite() && t > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam {
            field: "t",
            reason: format!("must be positive, got {t}"),
        })
    }
}

impl HeatKernel {
    pub fn new(diffusion: f64) -> Result<Self> {
        if !(diffusion.is_finite() && diffusion > 0.0) {
            return Err(Error::InvalidParam {
                field: "diffusion",
                reason: format!("must be positive, got {diffusion}"),
            });
        }
        Ok(Self { diffusion })
    }

    pub fn diffusion(&self) -> f64 {
        self.diffusion
    }

    /// Standard deviation of the kernel at time `t`, `sqrt(2 D t)`.
    pub fn std_dev(&self, t: f64) -> f64 {
        (2.0 * self.diffusion * t).sqrt()
    }

    pub fn density(&self, t: f64, x: f64) -> Result<f64> {
        require_positive_time(t)?;
        Ok(self.density_unchecked(t, x))
    }

    /// `density` without the time check, for hot loops over validated grids.
    pub(crate) fn density_unchecked(&self, t: f64, x: f64) -> f64 {
        let four_dt = 4.0 * self.diffusion * t;
        (-x * x / four_dt).exp() / (PI * four_dt).sqrt()
    }

    /// Macroscopic velocity `-D u_x / u`, which for this kernel is `x / (2t)`.
    pub fn velocity(&self, t: f64, x: f64) -> Result<f64> {
        require_positive_time(t)?;
        Ok(x / (2.0 * t))
    }

    /// The exact solution sampled at the cell centres at `t_init`.
    pub fn initial_field(&self, grid: &GridSpec) -> DensityField {
        self.sampled_field(grid, grid.t_init())
    }

    /// The exact solution sampled at the cell centres at time `t > 0`.
    pub fn sampled_field(&self, grid: &GridSpec, t: f64) -> DensityField {
        DensityField::new(
            grid.cell_centers()
                .map(|x| self.density_unchecked(t, x))
                .collect(),
        )
    }
}

/// Position at time `t` of the solution of `dY/dt = Y / (2t)` with `Y(t_init) = y_init`.
pub fn exact_macro_trajectory(t_init: f64, y_init: f64, t: f64) -> Result<f64> {
    require_positive_time(t_init)?;
    if !(t >= t_init) {
        return Err(Error::InvalidParam {
            field: "t",
            reason: format!("must not precede t_init = {t_init}, got {t}"),
        });
    }
    Ok(y_init * (t / t_init).sqrt())
}
