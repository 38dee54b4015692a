//! Microscopic solver: weak Euler random walk, the regularized (branch-blended)
//! walk, the convex-combination walk, and histogram density estimation.

use statrs::distribution::{ContinuousCDF, Normal};

use crate::analytic::HeatKernel;
use crate::error::{Error, Result};
use crate::field::DensityField;
use crate::grid::{GridSpec, SimParams};
use crate::rng::NoiseStream;

/// A macroscopic velocity `v(t, x)` sampled by particles on their drift branch.
pub trait VelocityField {
    fn velocity_at(&self, t: f64, x: f64) -> f64;
}

impl VelocityField for HeatKernel {
    #[inline]
    fn velocity_at(&self, t: f64, x: f64) -> f64 {
        x / (2.0 * t)
    }
}

impl<F: Fn(f64, f64) -> f64> VelocityField for F {
    #[inline]
    fn velocity_at(&self, t: f64, x: f64) -> f64 {
        self(t, x)
    }
}

/// Positions of all particles at one time level together with the stream
/// that will drive the next steps.
#[derive(Debug, Clone)]
pub struct ParticleEnsemble {
    positions: Vec<f64>,
    time_index: usize,
    stream: NoiseStream,
}

/// Magnitude of one weak Euler displacement, `sqrt(2D) sqrt(dt)`.
#[inline]
pub fn walk_step(diffusion: f64, dt: f64) -> f64 {
    (2.0 * diffusion).sqrt() * dt.sqrt()
}

/// Speed of a particle reconstructed from one weak Euler step; diverges as `dt -> 0`.
pub fn discrete_particle_speed(diffusion: f64, dt: f64) -> f64 {
    walk_step(diffusion, dt) / dt
}

impl ParticleEnsemble {
    /// Independent draws from the exact solution at `t_init`, a centred Gaussian
    /// with variance `2 D t_init`, one uniform per particle through the inverse CDF.
    pub fn sample_initial(params: &SimParams, grid: &GridSpec) -> Self {
        let mut stream = NoiseStream::from_seed(params.seed);
        let sd = (2.0 * params.diffusion * grid.t_init()).sqrt();
        let normal = Normal::new(0.0, sd).expect("positive standard deviation");
        let positions = (0..params.n_particles)
            .map(|_| normal.inverse_cdf(stream.open_uniform()))
            .collect();
        Self {
            positions,
            time_index: 0,
            stream,
        }
    }

    /// An ensemble at explicit positions, driven by a fresh stream from `seed`.
    pub fn from_positions(positions: Vec<f64>, seed: u64) -> Self {
        Self {
            positions,
            time_index: 0,
            stream: NoiseStream::from_seed(seed),
        }
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn time_index(&self) -> usize {
        self.time_index
    }

    pub fn stream(&self) -> &NoiseStream {
        &self.stream
    }

    /// Weak Euler step: every particle moves by `+-sqrt(2D dt)` with equal probability.
    pub fn euler_step(&mut self, params: &SimParams, dt: f64) {
        let step = walk_step(params.diffusion, dt);
        let crn = params.common_random_numbers;
        let stream = &mut self.stream;
        for y in &mut self.positions {
            if crn {
                stream.uniform();
            }
            *y += stream.sign() * step;
        }
        self.time_index += 1;
    }

    /// Regularized Brownian step. Each particle independently takes the random
    /// walk branch with probability `theta` and otherwise drifts with
    /// `velocity(t_n, y) dt`.
    ///
    /// The branch uniform is drawn only when `0 < theta < 1`, and the sign only
    /// on the walk branch, unless common random numbers are requested, in which
    /// case both are always drawn. At `theta = 1` the draws therefore coincide
    /// with [`euler_step`](Self::euler_step).
    pub fn regularized_step<V: VelocityField + ?Sized>(
        &mut self,
        params: &SimParams,
        t_n: f64,
        dt: f64,
        velocity: &V,
    ) {
        let step = walk_step(params.diffusion, dt);
        let theta = params.theta;
        let crn = params.common_random_numbers;
        let mixed = theta > 0.0 && theta < 1.0;
        let stream = &mut self.stream;
        for y in &mut self.positions {
            let micro = if crn || mixed {
                stream.uniform() < theta
            } else {
                theta >= 1.0
            };
            if micro {
                *y += stream.sign() * step;
            } else {
                if crn {
                    stream.uniform();
                }
                *y += velocity.velocity_at(t_n, *y) * dt;
            }
        }
        self.time_index += 1;
    }

    /// Convex combination of the walk and drift displacements with the
    /// analytic velocity. Does not reproduce the heat kernel for `0 < theta < 1`.
    pub fn convex_demo_step(&mut self, params: &SimParams, t_n: f64, dt: f64) {
        let step = walk_step(params.diffusion, dt);
        let theta = params.theta;
        let crn = params.common_random_numbers;
        let stream = &mut self.stream;
        for y in &mut self.positions {
            if crn {
                stream.uniform();
            }
            let omega = stream.sign();
            *y = *y + theta * omega * step + (1.0 - theta) * (*y / (2.0 * t_n)) * dt;
        }
        self.time_index += 1;
    }

    pub fn estimate_density(&self, grid: &GridSpec, n_particles: usize) -> Result<DensityEstimate> {
        estimate_density(&self.positions, grid, n_particles)
    }

    pub fn out_of_domain(&self, grid: &GridSpec) -> usize {
        self.positions
            .iter()
            .filter(|&&y| !grid.contains(y))
            .count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pub field: DensityField,
    pub out_of_domain: usize,
}

/// Cell counts of the positions; out-of-domain positions are not counted.
pub fn cell_counts(positions: &[f64], grid: &GridSpec) -> (Vec<u64>, usize) {
    let mut counts = vec![0u64; grid.n_cells()];
    let mut outside = 0;
    for &y in positions {
        match grid.cell_index(y) {
            Some(j) => counts[j] += 1,
            None => outside += 1,
        }
    }
    (counts, outside)
}

/// Histogram estimate `count_j / (N_p dx)`. `n_particles` is the nominal
/// ensemble size and stays the normaliser even when particles have left the domain.
pub fn estimate_density(
    positions: &[f64],
    grid: &GridSpec,
    n_particles: usize,
) -> Result<DensityEstimate> {
    if n_particles == 0 {
        return Err(Error::InvalidParam {
            field: "n_particles",
            reason: "density estimation needs at least one particle".into(),
        });
    }
    let (counts, out_of_domain) = cell_counts(positions, grid);
    let scale = 1.0 / (n_particles as f64 * grid.dx());
    let field = DensityField::new(counts.into_iter().map(|c| c as f64 * scale).collect());
    Ok(DensityEstimate {
        field,
        out_of_domain,
    })
}
