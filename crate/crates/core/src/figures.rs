//! Presets that regenerate the data behind each published figure panel.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::config::{RunConfig, Snapshot};
use crate::error::{Error, Result};
use crate::grid::Mode;
use crate::metrics::{iso_error_search, IsoErrorPoint, IsoErrorSearch};
use crate::output::{emit_figure_data, write_iso_error, FigureKind};
use crate::sim::{run, SnapshotPolicy};

/// Blend weights of the iso-error curve.
pub const ISO_ERROR_THETAS: [f64; 5] = [0.2, 0.4, 0.6, 0.8, 1.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FigureId {
    Fig1a,
    Fig1b,
    Fig1c,
    Fig1d,
    Fig2a,
    Fig2b,
    Fig2c,
    Fig2d,
    Fig2e,
    Fig2f,
    Fig3a,
    Fig3b,
    Fig3c,
    Fig3d,
    Fig3e,
    Fig3f,
}

/// What a panel shows and how to produce it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Panel {
    Single {
        mode: Mode,
        theta: Option<f64>,
        n_particles: usize,
        kind: FigureKind,
    },
    IsoError,
}

impl FigureId {
    pub const ALL: [FigureId; 16] = [
        FigureId::Fig1a,
        FigureId::Fig1b,
        FigureId::Fig1c,
        FigureId::Fig1d,
        FigureId::Fig2a,
        FigureId::Fig2b,
        FigureId::Fig2c,
        FigureId::Fig2d,
        FigureId::Fig2e,
        FigureId::Fig2f,
        FigureId::Fig3a,
        FigureId::Fig3b,
        FigureId::Fig3c,
        FigureId::Fig3d,
        FigureId::Fig3e,
        FigureId::Fig3f,
    ];

    pub fn name(self) -> &'static str {
        const NAMES: [&str; 16] = [
            "fig1a", "fig1b", "fig1c", "fig1d", "fig2a", "fig2b", "fig2c", "fig2d", "fig2e",
            "fig2f", "fig3a", "fig3b", "fig3c", "fig3d", "fig3e", "fig3f",
        ];
        NAMES[self as usize]
    }

    pub fn panel(self) -> Panel {
        use FigureId::*;
        use FigureKind::{DensityVsExact as Density, Trajectories as Paths};
        let single = |mode, theta, n_particles, kind| Panel::Single {
            mode,
            theta,
            n_particles,
            kind,
        };
        match self {
            Fig1a => single(Mode::PartialCouplingI, Some(1.0), 100, Paths),
            Fig1b => single(Mode::PartialCouplingI, Some(0.2), 100, Paths),
            Fig1c => single(Mode::PartialCouplingI, Some(0.0), 100, Paths),
            // the histogram is the same for any theta; the configured one is used
            Fig1d => single(Mode::PartialCouplingI, None, 500_000, Density),
            Fig2a => single(Mode::PartialCouplingII, Some(1.0), 100, Density),
            Fig2b => single(Mode::PartialCouplingII, Some(1.0), 1000, Density),
            Fig2c => single(Mode::PartialCouplingII, Some(1.0), 100_000, Density),
            Fig2d => single(Mode::PartialCouplingII, Some(0.5), 100, Density),
            Fig2e => single(Mode::PartialCouplingII, Some(0.5), 1000, Density),
            Fig2f => Panel::IsoError,
            Fig3a => single(Mode::FullCoupling, Some(0.8), 100, Paths),
            Fig3b => single(Mode::FullCoupling, Some(0.5), 100, Paths),
            Fig3c => single(Mode::FullCoupling, Some(0.2), 100, Paths),
            Fig3d => single(Mode::FullCoupling, Some(0.8), 100, Density),
            Fig3e => single(Mode::FullCoupling, Some(0.5), 100, Density),
            Fig3f => single(Mode::FullCoupling, Some(0.2), 100, Density),
        }
    }

    /// `base` with the panel's mode, weight, particle count and snapshot policy applied.
    pub fn config(self, base: &RunConfig) -> Option<RunConfig> {
        let Panel::Single {
            mode,
            theta,
            n_particles,
            kind,
        } = self.panel()
        else {
            return None;
        };
        let snapshot = match kind {
            FigureKind::Trajectories => SnapshotPolicy::All,
            FigureKind::DensityVsExact => SnapshotPolicy::FinalOnly,
        };
        Some(RunConfig {
            mode,
            theta: theta.unwrap_or(base.theta),
            n_particles,
            snapshot: Snapshot(snapshot),
            ..base.clone()
        })
    }
}

impl fmt::Display for FigureId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FigureId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown figure `{s}` (expected fig1a..fig1d, fig2a..fig2f, fig3a..fig3f)"
                ))
            })
    }
}

/// Iso-error points for every weight in [`ISO_ERROR_THETAS`].
pub fn iso_error_curve(base: &RunConfig, search: &IsoErrorSearch) -> Result<Vec<IsoErrorPoint>> {
    let grid = base.grid()?;
    ISO_ERROR_THETAS
        .iter()
        .map(|&theta| iso_error_search(theta, search, &grid, base.diffusion))
        .collect()
}

/// Runs the preset for `id` and writes its data file into `dir`, together
/// with the resolved `config.toml` for single-run panels.
pub fn reproduce(
    id: FigureId,
    base: &RunConfig,
    search: &IsoErrorSearch,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    match id.panel() {
        Panel::IsoError => {
            let points = iso_error_curve(base, search)?;
            let path = dir.join("iso_error.csv");
            write_iso_error(&path, &points)?;
            Ok(vec![path])
        }
        Panel::Single { kind, .. } => {
            let config = id.config(base).expect("single panel");
            config.validate()?;
            let result = run(&config.sim_params(), &config.grid()?, config.snapshot.0)?;
            let config_path = dir.join("config.toml");
            std::fs::write(&config_path, config.render())?;
            let data = emit_figure_data(&result, kind, dir)?;
            Ok(vec![config_path, data])
        }
    }
}
