//! Run configuration files.
//!
//! A config is a TOML document of `key = value` pairs; every key is optional
//! and unknown keys are rejected:
//!
//! ```toml
//! mode = "full-coupling"      # micro-only | macro-only | partial-coupling-i |
//!                             # convex-demo | partial-coupling-ii | full-coupling
//! theta = 0.5
//! n_particles = 100
//! seed = 0
//! n_seeds = 1                 # seeds seed .. seed + n_seeds - 1
//! diffusion = 0.5
//! x_bound = 8.0
//! n_cells = 50
//! t_init = 0.5
//! t_final = 5.0
//! n_steps = 500
//! snapshot = "final"          # final | all | every:K
//! output_dir = "out"
//! common_random_numbers = false
//! field_init = "analytic"     # analytic | histogram
//! boundary = "kernel"         # kernel | zero
//! density_floor = 1e-12
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::BoundaryCondition;
use crate::grid::{self, FieldInit, GridSpec, Mode, SimParams};
use crate::sim::SnapshotPolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Snapshot(pub SnapshotPolicy);

impl FromStr for Snapshot {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let policy = match s {
            "final" => SnapshotPolicy::FinalOnly,
            "all" => SnapshotPolicy::All,
            _ => match s.strip_prefix("every:").map(str::parse::<usize>) {
                Some(Ok(k)) if k > 0 => SnapshotPolicy::Every(k),
                _ => {
                    return Err(Error::Config(format!(
                        "field `snapshot`: expected final, all or every:K with K > 0, got `{s}`"
                    )))
                }
            },
        };
        Ok(Snapshot(policy))
    }
}

impl TryFrom<String> for Snapshot {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Snapshot> for String {
    fn from(s: Snapshot) -> String {
        s.to_string()
    }
}

impl fmt::Display for Snapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            SnapshotPolicy::FinalOnly => f.write_str("final"),
            SnapshotPolicy::All => f.write_str("all"),
            SnapshotPolicy::Every(k) => write!(f, "every:{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    pub theta: f64,
    pub n_particles: usize,
    pub seed: u64,
    pub n_seeds: usize,
    pub diffusion: f64,
    pub x_bound: f64,
    pub n_cells: usize,
    pub t_init: f64,
    pub t_final: f64,
    pub n_steps: usize,
    pub snapshot: Snapshot,
    pub output_dir: PathBuf,
    pub common_random_numbers: bool,
    pub field_init: FieldInit,
    pub boundary: BoundaryCondition,
    pub density_floor: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mode: Mode::MacroOnly,
            theta: 0.5,
            n_particles: 100,
            seed: 0,
            n_seeds: 1,
            diffusion: grid::DEFAULT_DIFFUSION,
            x_bound: grid::DEFAULT_X_BOUND,
            n_cells: grid::DEFAULT_N_CELLS,
            t_init: grid::DEFAULT_T_INIT,
            t_final: grid::DEFAULT_T_FINAL,
            n_steps: grid::DEFAULT_N_STEPS,
            snapshot: Snapshot::default(),
            output_dir: PathBuf::from("out"),
            common_random_numbers: false,
            field_init: FieldInit::Analytic,
            boundary: BoundaryCondition::Kernel,
            density_floor: grid::DEFAULT_DENSITY_FLOOR,
        }
    }
}

impl RunConfig {
    /// Parses and validates a config; fields not present take their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let config: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn render(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Range checks on single fields. Cross-field requirements such as a
    /// particle count for coupled modes are checked when the run starts.
    pub fn validate(&self) -> Result<()> {
        self.grid()?;
        SimParams {
            theta: self.theta,
            ..self.sim_params()
        }
        .validate()?;
        if self.n_seeds == 0 {
            return Err(Error::InvalidParam {
                field: "n_seeds",
                reason: "must be at least 1".into(),
            });
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(
            self.x_bound,
            self.n_cells,
            self.t_init,
            self.t_final,
            self.n_steps,
        )
    }

    /// Parameters for a run with the configured seed. `theta` is pinned to 1
    /// for micro-only runs and to 0 for macro-only runs.
    pub fn sim_params(&self) -> SimParams {
        let theta = match self.mode {
            Mode::MicroOnly => 1.0,
            Mode::MacroOnly => 0.0,
            _ => self.theta,
        };
        SimParams {
            diffusion: self.diffusion,
            theta,
            n_particles: self.n_particles,
            seed: self.seed,
            mode: self.mode,
            common_random_numbers: self.common_random_numbers,
            field_init: self.field_init,
            boundary: self.boundary,
            density_floor: self.density_floor,
        }
    }

    pub fn seeds(&self) -> impl Iterator<Item = u64> {
        let base = self.seed;
        (0..self.n_seeds as u64).map(move |i| base + i)
    }
}
