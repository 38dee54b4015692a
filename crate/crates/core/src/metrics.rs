//! Error metrics, seed averaging and the iso-error search over particle counts.

use rayon::prelude::*;

use crate::analytic::HeatKernel;
use crate::error::{Error, Result};
use crate::field::DensityField;
use crate::grid::{GridSpec, Mode, SimParams};
use crate::sim::{run, ParticleSnapshot, RunResult, SnapshotPolicy};

/// `sum_j |u(t, x_j) - field_j| dx`.
pub fn l1_error(field: &DensityField, grid: &GridSpec, kernel: &HeatKernel, t: f64) -> Result<f64> {
    kernel.density(t, 0.0)?;
    if field.len() != grid.n_cells() {
        return Err(Error::LengthMismatch {
            expected: grid.n_cells(),
            actual: field.len(),
        });
    }
    Ok(field
        .values()
        .iter()
        .zip(grid.cell_centers())
        .map(|(&v, x)| (kernel.density_unchecked(t, x) - v).abs())
        .sum::<f64>()
        * grid.dx())
}

/// L1 distance between two fields on the same grid.
pub fn l1_distance(a: &DensityField, b: &DensityField, dx: f64) -> f64 {
    a.values()
        .iter()
        .zip(b.values())
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
        * dx
}

/// Final-time error of a run against the exact solution.
pub fn run_error(result: &RunResult) -> Result<f64> {
    let field = result
        .final_density()
        .ok_or_else(|| Error::MissingSnapshot("final density".into()))?;
    let kernel = HeatKernel::new(result.params.diffusion)?;
    l1_error(field, &result.grid, &kernel, result.grid.t_final())
}

/// Mean and standard error of a sample; the standard error is 0 for one value.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub mean: f64,
    pub standard_error: f64,
    pub n_seeds: usize,
    pub errors: Vec<f64>,
}

impl ErrorReport {
    pub fn from_samples(errors: Vec<f64>) -> Self {
        let n = errors.len();
        let mean = errors.iter().sum::<f64>() / n as f64;
        let standard_error = if n > 1 {
            let var = errors.iter().map(|e| (e - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        } else {
            0.0
        };
        Self {
            mean,
            standard_error,
            n_seeds: n,
            errors,
        }
    }
}

/// Runs `f` for seeds `seed_base..seed_base + n_seeds` in parallel and
/// returns the outputs in seed order.
pub fn map_seeds<T, F>(params: &SimParams, n_seeds: usize, seed_base: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&SimParams) -> Result<T> + Sync,
{
    (0..n_seeds as u64)
        .into_par_iter()
        .map(|i| {
            let mut p = *params;
            p.seed = seed_base + i;
            f(&p)
        })
        .collect()
}

pub fn averaged_error(
    params: &SimParams,
    grid: &GridSpec,
    n_seeds: usize,
    seed_base: u64,
) -> Result<ErrorReport> {
    if n_seeds == 0 {
        return Err(Error::InvalidParam {
            field: "n_seeds",
            reason: "must be at least 1".into(),
        });
    }
    let errors = map_seeds(params, n_seeds, seed_base, |p| {
        run_error(&run(p, grid, SnapshotPolicy::FinalOnly)?)
    })?;
    Ok(ErrorReport::from_samples(errors))
}

/// Mean over particles of `sum_n (Y_{n+1} - Y_n)^2` along recorded trajectories.
pub fn mean_quadratic_variation(trajectories: &[ParticleSnapshot]) -> f64 {
    let Some(first) = trajectories.first() else {
        return 0.0;
    };
    let n_p = first.positions.len();
    if n_p == 0 {
        return 0.0;
    }
    let total: f64 = trajectories
        .windows(2)
        .map(|w| {
            w[0].positions
                .iter()
                .zip(&w[1].positions)
                .map(|(a, b)| (b - a).powi(2))
                .sum::<f64>()
        })
        .sum();
    total / n_p as f64
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IsoErrorSearch {
    pub target: f64,
    pub tolerance: f64,
    pub n_seeds: usize,
    pub seed_base: u64,
    pub min_particles: usize,
    pub max_particles: usize,
}

impl Default for IsoErrorSearch {
    fn default() -> Self {
        Self {
            target: 0.025,
            tolerance: 0.002,
            n_seeds: 20,
            seed_base: 0,
            min_particles: 1,
            max_particles: 1 << 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IsoErrorPoint {
    pub theta: f64,
    pub n_particles_required: usize,
    pub achieved_error: f64,
    pub standard_error: f64,
    pub n_seeds: usize,
}

/// Smallest particle count for which the seed-averaged final error of the
/// particle-corrected heat equation reaches `target`.
///
/// A doubling scan from `min_particles` brackets the crossing, then integer
/// bisection narrows it. Any probe within `tolerance` of the target ends the
/// search early.
pub fn iso_error_search(
    theta: f64,
    search: &IsoErrorSearch,
    grid: &GridSpec,
    diffusion: f64,
) -> Result<IsoErrorPoint> {
    if !(search.target > 0.0) {
        return Err(Error::InvalidParam {
            field: "target",
            reason: "must be positive".into(),
        });
    }
    if search.min_particles == 0 || search.min_particles > search.max_particles {
        return Err(Error::InvalidParam {
            field: "np_bounds",
            reason: format!(
                "need 1 <= min <= max, got [{}, {}]",
                search.min_particles, search.max_particles
            ),
        });
    }
    let evaluate = |n: usize| -> Result<ErrorReport> {
        let mut params = SimParams::new(Mode::PartialCouplingII, theta, n, 0);
        params.diffusion = diffusion;
        averaged_error(&params, grid, search.n_seeds, search.seed_base)
    };
    let point = |n: usize, r: &ErrorReport| IsoErrorPoint {
        theta,
        n_particles_required: n,
        achieved_error: r.mean,
        standard_error: r.standard_error,
        n_seeds: r.n_seeds,
    };
    let close = |r: &ErrorReport| (r.mean - search.target).abs() <= search.tolerance;

    let mut lo = search.min_particles;
    let lo_report = evaluate(lo)?;
    if close(&lo_report) {
        return Ok(point(lo, &lo_report));
    }
    if lo_report.mean < search.target {
        return Err(Error::Bracket(format!(
            "theta = {theta}: error {:.5} at N_p = {lo} is already below target {}",
            lo_report.mean, search.target
        )));
    }

    let (mut hi, mut hi_report) = loop {
        let n = lo.saturating_mul(2).min(search.max_particles);
        let r = evaluate(n)?;
        if close(&r) {
            return Ok(point(n, &r));
        }
        if r.mean < search.target {
            break (n, r);
        }
        if n == search.max_particles {
            return Err(Error::Bracket(format!(
                "theta = {theta}: error {:.5} at N_p = {n} still above target {}",
                r.mean, search.target
            )));
        }
        lo = n;
    };

    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        let r = evaluate(mid)?;
        if close(&r) {
            return Ok(point(mid, &r));
        }
        if r.mean > search.target {
            lo = mid;
        } else {
            hi = mid;
            hi_report = r;
        }
    }
    Ok(point(hi, &hi_report))
}
